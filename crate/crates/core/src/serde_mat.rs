//! Serde adapters that write matrices as nested row arrays and vectors as
//! flat arrays, e.g. `{"cov": [[1.0, 0.0], [0.0, 1.0]]}`.

pub mod matrix {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::linalg::Matrix;

    pub fn serialize<S: Serializer>(m: &Matrix, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = m
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect();
        s.collect_seq(rows)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Matrix, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        from_rows(&rows).map_err(D::Error::custom)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Matrix, String> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if nrows == 0 || ncols == 0 {
            return Err("matrix must have at least one row and one column".into());
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != ncols) {
            return Err(format!(
                "ragged matrix: row {bad} has {} entries, expected {ncols}",
                rows[bad].len()
            ));
        }
        if rows.iter().flatten().any(|x| !x.is_finite()) {
            return Err("matrix entries must be finite".into());
        }
        Ok(Matrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
    }
}

pub mod vector {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::linalg::Vector;

    pub fn serialize<S: Serializer>(v: &Vector, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vector, D::Error> {
        let xs = Vec::<f64>::deserialize(d)?;
        if xs.iter().any(|x| !x.is_finite()) {
            return Err(D::Error::custom("vector entries must be finite"));
        }
        Ok(Vector::from_vec(xs))
    }
}

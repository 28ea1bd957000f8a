use std::path::Path;

use cartan_core::models::json::geometry_from_json;
use cartan_core::numeric::{Mat, Vector};
use cartan_core::{catalog, Geometry};

/// Comma-separated numbers.
pub fn parse_vector(s: &str) -> Result<Vector, String> {
    let values = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("not a number: '{}'", t.trim()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(format!("non-finite entry in '{s}'"));
    }
    Ok(Vector::from_vec(values))
}

/// Rows separated by semicolons, entries by commas.
pub fn parse_matrix(s: &str) -> Result<Mat, String> {
    let rows = s
        .split(';')
        .map(parse_vector)
        .collect::<Result<Vec<_>, _>>()?;
    let cols = rows.first().map(|r| r.len()).unwrap_or(0);
    if cols == 0 || rows.iter().any(|r| r.len() != cols) {
        return Err(format!("ragged or empty matrix: '{s}'"));
    }
    Ok(Mat::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

/// A catalog name, or a path to a geometry JSON document.
pub fn load_model(selector: &str) -> Result<Geometry, String> {
    let path = Path::new(selector);
    if selector.ends_with(".json") || path.is_file() {
        let text =
            std::fs::read_to_string(path).map_err(|e| format!("cannot read {selector}: {e}"))?;
        return geometry_from_json(&text).map_err(|e| format!("{selector}: {e}"));
    }
    catalog(selector).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vectors_and_matrices() {
        assert_eq!(
            parse_vector("1, -2.5,3e-1").unwrap().as_slice(),
            &[1.0, -2.5, 0.3]
        );
        assert!(parse_vector("1,,2").is_err());
        assert!(parse_vector("1,nan").is_err());
        let m = parse_matrix("-1,1;0,-1").unwrap();
        assert_eq!(
            (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]),
            (-1.0, 1.0, 0.0, -1.0)
        );
        assert!(parse_matrix("1,2;3").is_err());
    }
}

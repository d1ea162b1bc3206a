use crate::error::{Error, Result};

/// Pearson correlation, `None` when either side has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Pairwise correlations between metric columns (each column holds one value
/// per source). Rows and columns of constant metrics are `None`.
pub fn pearson_matrix(columns: &[Vec<f64>]) -> Result<Vec<Vec<Option<f64>>>> {
    let n = columns.first().map_or(0, Vec::len);
    if columns.iter().any(|c| c.len() != n) {
        return Err(Error::Domain(
            "metric columns have different lengths".into(),
        ));
    }
    if n < 2 {
        return Err(Error::Domain(format!(
            "correlation needs at least 2 sources, got {n}"
        )));
    }
    if columns.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Domain("metric values must be finite".into()));
    }
    let m = columns.len();
    let mut out = vec![vec![None; m]; m];
    for i in 0..m {
        for j in i..m {
            let r = pearson(&columns[i], &columns[j]).map(|r| if i == j { 1.0 } else { r });
            out[i][j] = r;
            out[j][i] = r;
        }
    }
    Ok(out)
}

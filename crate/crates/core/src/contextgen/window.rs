use crate::error::{Error, Result};
use crate::rerank::Selected;

/// The slice of the ranked context shown to generation `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextWindow {
    pub t: usize,
    pub window_size: usize,
    pub members: Vec<Selected>,
}

impl ContextWindow {
    pub fn ids(&self) -> Vec<String> {
        self.members
            .iter()
            .map(|m| m.candidate.recipe_id.clone())
            .collect()
    }
}

/// Members `D[t'w + 1 ..= (t'+1)w]` (1-based) of `selection`, where
/// `t' = t mod floor(k / w)` and `k = |selection|`.
pub fn build_window(selection: &[Selected], w: usize, t: usize) -> Result<ContextWindow> {
    let k = selection.len();
    if w == 0 || w > k {
        return Err(Error::Config(format!(
            "window size {w} must be between 1 and the selection size {k}"
        )));
    }
    let block = t % (k / w);
    Ok(ContextWindow {
        t,
        window_size: w,
        members: selection[block * w..(block + 1) * w].to_vec(),
    })
}

use serde::{Deserialize, Serialize};

use crate::dataset::Column;

pub const MASK_TOKEN: &str = "*";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskMode {
    /// Every cell becomes `*`.
    #[default]
    Full,
    /// Keeps the first `keep_prefix` characters and stars out the rest,
    /// preserving length.
    Partial { keep_prefix: usize },
}

/// Masks a column of any kind, working on each cell's string rendering.
pub fn mask_column(col: &Column, mode: MaskMode) -> Column {
    let cells = match mode {
        MaskMode::Full => vec![MASK_TOKEN.to_string(); col.len()],
        MaskMode::Partial { keep_prefix } => (0..col.len())
            .map(|i| {
                let token = col.token(i);
                let len = token.chars().count();
                let kept: String = token.chars().take(keep_prefix).collect();
                kept + &"*".repeat(len.saturating_sub(keep_prefix))
            })
            .collect(),
    };
    Column::Masked(cells)
}

use std::fmt::Write as _;

use crate::formula::Layout;

use super::grid::{CellStats, Method};
use super::qrels::RelevanceSetting;
use super::EvalError;

/// Methods × batch sizes grid of mean bpref, as aligned text and as CSV.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Heatmap {
    pub text: String,
    pub csv: String,
}

pub const HEATMAP_HEADER: &str = "layout,setting,augmentation,batch_size,mean_bpref,std_bpref";

pub fn render_heatmap(
    stats: &[CellStats],
    layout: Layout,
    setting: RelevanceSetting,
    methods: &[Method],
    batch_sizes: &[usize],
) -> Result<Heatmap, EvalError> {
    let lookup = |method: Method, batch_size: usize| {
        stats
            .iter()
            .find(|s| s.layout == layout && s.setting == setting && s.method == method && s.batch_size == batch_size)
            .ok_or_else(|| EvalError::MissingCell {
                layout: layout.to_string(),
                setting: setting.name().to_string(),
                method: method.to_string(),
                batch_size,
            })
    };
    let label_width = methods.iter().map(|m| m.name().len()).max().unwrap_or(0).max("augmentation".len());
    let mut text = format!("bpref ({}, {})\n{:<label_width$}", layout.as_str().to_uppercase(), setting.name(), "augmentation");
    for b in batch_sizes {
        write!(text, " {b:>7}").expect("formatting into a string");
    }
    text.push('\n');
    let mut csv = format!("{HEATMAP_HEADER}\n");
    for &m in methods {
        write!(text, "{:<label_width$}", m.name()).expect("formatting into a string");
        for &b in batch_sizes {
            let cell = lookup(m, b)?;
            write!(text, " {:>7.3}", cell.mean).expect("formatting into a string");
            writeln!(csv, "{},{},{},{},{:.3},{:.3}", layout, setting.name(), m, b, cell.mean, cell.std)
                .expect("formatting into a string");
        }
        text.push('\n');
    }
    Ok(Heatmap { text, csv })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::augment::Strategy;

    fn stats(methods: &[Method], batches: &[usize]) -> Vec<CellStats> {
        let mut out = Vec::new();
        for (i, &method) in methods.iter().enumerate() {
            for (j, &batch_size) in batches.iter().enumerate() {
                out.push(CellStats {
                    layout: Layout::Slt,
                    setting: RelevanceSetting::Full,
                    method,
                    batch_size,
                    mean: 0.5 + 0.01 * (i * 4 + j) as f64,
                    std: 0.001,
                    count: 5,
                });
            }
        }
        out
    }

    #[test]
    fn full_grid() {
        let methods: Vec<Method> = Method::ALL.iter().copied().filter(|m| *m != Method::Baseline).collect();
        let batches = [16, 32, 64, 128];
        let h = render_heatmap(&stats(&methods, &batches), Layout::Slt, RelevanceSetting::Full, &methods, &batches).unwrap();
        assert_eq!(h.csv.lines().count(), 1 + 24);
        assert_eq!(h.csv.lines().next(), Some(HEATMAP_HEADER));
        assert_eq!(h.text.lines().count(), 2 + 6);
        assert!(h.text.lines().nth(2).unwrap().starts_with("VarSub"));
        assert!(h.text.contains("0.500") && h.text.contains("0.730"));
    }

    #[test]
    fn missing_cell_names_coordinates() {
        let methods = [Method::Augmented(Strategy::VarSub)];
        let err = render_heatmap(&stats(&methods, &[16]), Layout::Slt, RelevanceSetting::Full, &methods, &[16, 32]).unwrap_err();
        match err {
            EvalError::MissingCell { method, batch_size, .. } => {
                assert_eq!(method, "VarSub");
                assert_eq!(batch_size, 32);
            }
            e => panic!("unexpected {e}"),
        }
        let err = render_heatmap(&stats(&methods, &[16]), Layout::Opt, RelevanceSetting::Full, &methods, &[16]);
        assert!(matches!(err, Err(EvalError::MissingCell { .. })));
    }
}

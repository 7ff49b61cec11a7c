use std::fs;
use std::path::Path;

use shuffle_rdp_core::{BoundMethod, RdpOrder, ShuffleParams};

use crate::{format_g12, CliError};

/// Columns written when `--methods` is not given.
pub const DEFAULT_CURVE_METHODS: [BoundMethod; 5] = [
    BoundMethod::Ub1,
    BoundMethod::Ub2,
    BoundMethod::Lower,
    BoundMethod::Erlingsson,
    BoundMethod::Best,
];

/// One sweep over the integer orders `2..=lambda_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRequest {
    pub params: ShuffleParams,
    pub lambda_max: u32,
    pub methods: Vec<BoundMethod>,
}

impl CurveRequest {
    pub fn new(params: ShuffleParams, lambda_max: u32, methods: Vec<BoundMethod>) -> Result<Self, CliError> {
        if lambda_max < 2 {
            return Err(CliError::Usage(format!("--lambda-max must be at least 2, got {lambda_max}")));
        }
        if methods.is_empty() {
            return Err(CliError::Usage("--methods must name at least one bound".into()));
        }
        Ok(Self { params, lambda_max, methods })
    }

    /// Evaluates every cell; bounds that fail (e.g. a violated guard) or are
    /// not finite become `inf`.
    pub fn rows(&self) -> Vec<(u32, Vec<f64>)> {
        (2..=self.lambda_max)
            .map(|k| {
                let order = RdpOrder::integer(k).expect("k >= 2");
                let cells = self
                    .methods
                    .iter()
                    .map(|m| match m.evaluate(&self.params, order) {
                        Ok(v) if v.is_finite() => v,
                        _ => f64::INFINITY,
                    })
                    .collect();
                (k, cells)
            })
            .collect()
    }

    /// The full CSV document, `\n`-terminated rows.
    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let header = std::iter::once("lambda".to_string()).chain(self.methods.iter().map(|m| m.name().to_string()));
        w.write_record(header).expect("writing to memory");
        for (k, cells) in self.rows() {
            let record = std::iter::once(k.to_string()).chain(cells.into_iter().map(format_g12));
            w.write_record(record).expect("writing to memory");
        }
        w.into_inner().expect("flushing to memory")
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        fs::write(path, self.to_csv()).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_row_and_header() {
        let req = CurveRequest::new(ShuffleParams::new(1.0, 1000).unwrap(), 2, vec![BoundMethod::Lower, BoundMethod::Best]).unwrap();
        let text = String::from_utf8(req.to_csv()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "lambda,lb,best");
        assert!(lines[1].starts_with("2,"));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn guarded_cells_become_inf() {
        let req = CurveRequest::new(ShuffleParams::new(2.0, 100).unwrap(), 5, vec![BoundMethod::Ub1Simplified]).unwrap();
        let text = String::from_utf8(req.to_csv()).unwrap();
        assert!(text.lines().skip(1).all(|l| l.ends_with(",inf")));
    }

    #[test]
    fn rejects_degenerate_requests() {
        let p = ShuffleParams::new(1.0, 10).unwrap();
        assert_eq!(CurveRequest::new(p, 1, vec![BoundMethod::Lower]).unwrap_err().exit_code(), 2);
        assert_eq!(CurveRequest::new(p, 4, vec![]).unwrap_err().exit_code(), 2);
    }
}

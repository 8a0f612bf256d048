use std::io::Read;

use clap::Args;
use hypersurf::json::herm_from_json;
use hypersurf::parse::infer_dimension;
use hypersurf::HermPoly;

use crate::Fail;

/// Where the model comes from: a file, stdin (`-`) or `--expr`.
#[derive(Args)]
pub struct Input {
    /// File holding an expression or a JSON polynomial; `-` reads stdin
    pub file: Option<String>,
    /// Expression given inline, e.g. `-2Re(z1) + |z2|^4`
    #[arg(long, allow_hyphen_values = true)]
    pub expr: Option<String>,
    /// Number of variables (inferred from the expression otherwise)
    #[arg(long)]
    pub n: Option<usize>,
}

impl Input {
    pub fn read(&self) -> Result<HermPoly, Fail> {
        let text = match (&self.file, &self.expr) {
            (Some(_), Some(_)) => return Err(Fail::Input("give either a file or --expr, not both".into())),
            (None, None) => return Err(Fail::Input("no input: give a file, `-` or --expr".into())),
            (None, Some(e)) => e.clone(),
            (Some(f), None) if f == "-" => {
                let mut s = String::new();
                std::io::stdin()
                    .read_to_string(&mut s)
                    .map_err(|e| Fail::Input(format!("stdin: {e}")))?;
                s
            }
            (Some(f), None) => std::fs::read_to_string(f).map_err(|e| Fail::Input(format!("{f}: {e}")))?,
        };
        let text = text.trim();
        if text.starts_with('{') {
            let r = herm_from_json(text).map_err(|e| Fail::Input(e.to_string()))?;
            if let Some(n) = self.n {
                if n != r.n() {
                    return Err(Fail::Input(format!(
                        "--n {n} disagrees with the JSON dimension {}",
                        r.n()
                    )));
                }
            }
            return Ok(r);
        }
        let n = self.n.unwrap_or_else(|| infer_dimension(text).max(1));
        crate::model(text, n)
    }
}

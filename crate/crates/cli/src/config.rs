//! Instance descriptions on disk and their validated in-memory form.
//!
//! The wire format is JSON with complex scalars as two-element `[re, im]`
//! arrays and matrices as row-major nested arrays. Exactly one of `frame`
//! (orthonormalized on load) or `state` (normalized on load) selects the
//! subspace.

use std::path::Path;

use serde::{Deserialize, Serialize};
use subspace_qsl::bounds::OptimizerSettings;
use subspace_qsl::operators::{self, validate_hermitian, Frame, HermitianOperator, StateVector};
use subspace_qsl::{CMatrix, CVector, C64};

use crate::error::{CliError, Result};

/// Crossing tolerance applied when neither the config nor `--tol` sets one.
pub const DEFAULT_CROSSING_TOL: f64 = 1e-9;

/// An instance file, structurally faithful to the JSON. Unknown fields are
/// rejected so typos surface instead of being ignored.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub hamiltonian: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<WireTolerances>,
}

/// Optional numeric overrides; anything absent falls back to the library
/// defaults.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireTolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hermiticity_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crossing_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer_starts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer_max_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer_relative_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer_seed: Option<u64>,
}

/// A loaded and validated instance, ready for the library.
pub struct Instance {
    pub label: Option<String>,
    pub hamiltonian: HermitianOperator,
    pub frame: Frame,
    /// Present when the config described the subspace by a single state;
    /// state-level bounds are reported only in that case.
    pub state: Option<StateVector>,
    pub crossing_tol: f64,
    pub optimizer: OptimizerSettings,
}

/// Reads, parses, and validates an instance file.
///
/// Parse failures name the path into the document (for example
/// `hamiltonian[0][1]`) along with the line and column.
pub fn load(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let mut de = serde_json::Deserializer::from_str(&text);
    let wire: WireConfig =
        serde_path_to_error::deserialize(&mut de).map_err(|e| CliError::Malformed {
            path: path.to_path_buf(),
            detail: format!("at {}: {}", e.path(), e.inner()),
        })?;
    validate(wire, path)
}

fn malformed(path: &Path, detail: String) -> CliError {
    CliError::Malformed {
        path: path.to_path_buf(),
        detail,
    }
}

fn matrix_from_rows(rows: &[Vec<[f64; 2]>], what: &str, path: &Path) -> Result<CMatrix> {
    if rows.is_empty() {
        return Err(malformed(path, format!("{what} has no rows")));
    }
    let cols = rows[0].len();
    if cols == 0 {
        return Err(malformed(path, format!("{what} has empty rows")));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != cols {
            return Err(malformed(
                path,
                format!("{what} row {i} has {} entries, expected {cols}", row.len()),
            ));
        }
    }
    Ok(CMatrix::from_fn(rows.len(), cols, |i, j| {
        C64::new(rows[i][j][0], rows[i][j][1])
    }))
}

fn validate(wire: WireConfig, path: &Path) -> Result<Instance> {
    let tol = wire.tolerances.clone().unwrap_or_default();
    let hermiticity = tol.hermiticity_tol.unwrap_or(operators::HERMITICITY_TOL);
    let rank_tol = tol.rank_tol.unwrap_or(operators::RANK_TOL);

    let h_matrix = matrix_from_rows(&wire.hamiltonian, "hamiltonian", path)?;
    let hamiltonian = validate_hermitian(&h_matrix, hermiticity)?;
    let n = hamiltonian.dim();

    let (frame, state) = match (&wire.frame, &wire.state) {
        (Some(_), Some(_)) | (None, None) => {
            return Err(malformed(
                path,
                "exactly one of \"frame\" or \"state\" must be present".to_string(),
            ));
        }
        (Some(rows), None) => {
            let m = matrix_from_rows(rows, "frame", path)?;
            if m.nrows() != n {
                return Err(malformed(
                    path,
                    format!(
                        "frame has {} rows but the Hamiltonian is {n}x{n}",
                        m.nrows()
                    ),
                ));
            }
            if m.ncols() > n {
                return Err(malformed(
                    path,
                    format!("frame has {} columns in dimension {n}", m.ncols()),
                ));
            }
            (operators::orthonormalize(&m, rank_tol)?, None)
        }
        (None, Some(entries)) => {
            if entries.len() != n {
                return Err(malformed(
                    path,
                    format!(
                        "state has {} entries but the Hamiltonian is {n}x{n}",
                        entries.len()
                    ),
                ));
            }
            let column = CMatrix::from_fn(n, 1, |i, _| C64::new(entries[i][0], entries[i][1]));
            let frame = operators::orthonormalize(&column, rank_tol)?;
            let state = StateVector::try_new(frame.column(0))?;
            (frame, Some(state))
        }
    };

    let mut optimizer = OptimizerSettings::default();
    if let Some(s) = tol.optimizer_starts {
        optimizer.starts = s;
    }
    if let Some(m) = tol.optimizer_max_iterations {
        optimizer.max_iterations = m;
    }
    if let Some(r) = tol.optimizer_relative_tolerance {
        optimizer.relative_tolerance = r;
    }
    if let Some(s) = tol.optimizer_seed {
        optimizer.seed = s;
    }

    Ok(Instance {
        label: wire.label,
        hamiltonian,
        frame,
        state,
        crossing_tol: tol.crossing_tol.unwrap_or(DEFAULT_CROSSING_TOL),
        optimizer,
    })
}

fn pairs_of_matrix(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

fn pairs_of_vector(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

/// Serializable description of a generated instance; floats survive the
/// JSON round trip exactly, so a written config reproduces the matrices
/// bit for bit.
pub fn wire_of_parts(
    label: Option<String>,
    h: &CMatrix,
    frame: Option<&CMatrix>,
    state: Option<&CVector>,
) -> WireConfig {
    WireConfig {
        label,
        hamiltonian: pairs_of_matrix(h),
        frame: frame.map(pairs_of_matrix),
        state: state.map(pairs_of_vector),
        tolerances: None,
    }
}

fn number(x: f64) -> String {
    // Shortest representation that parses back to the same double.
    serde_json::Number::from_f64(x).map_or_else(|| "null".to_string(), |n| n.to_string())
}

fn pair(p: &[f64; 2]) -> String {
    format!("[{}, {}]", number(p[0]), number(p[1]))
}

fn row(r: &[[f64; 2]]) -> String {
    format!("[{}]", r.iter().map(pair).collect::<Vec<_>>().join(", "))
}

fn matrix_block(name: &str, rows: &[Vec<[f64; 2]>]) -> String {
    let body = rows
        .iter()
        .map(|r| format!("    {}", row(r)))
        .collect::<Vec<_>>()
        .join(",\n");
    format!("  \"{name}\": [\n{body}\n  ]")
}

/// Renders a config with one matrix row per line, the layout the docs use;
/// the result parses back to exactly the same instance.
pub fn render(wire: &WireConfig) -> String {
    let mut blocks = Vec::new();
    if let Some(label) = &wire.label {
        blocks.push(format!(
            "  \"label\": {}",
            serde_json::to_string(label).expect("strings always serialize"),
        ));
    }
    blocks.push(matrix_block("hamiltonian", &wire.hamiltonian));
    if let Some(frame) = &wire.frame {
        blocks.push(matrix_block("frame", frame));
    }
    if let Some(state) = &wire.state {
        blocks.push(format!("  \"state\": {}", row(state)));
    }
    if let Some(tol) = &wire.tolerances {
        let mut fields = Vec::new();
        let mut float_field = |name: &str, v: Option<f64>| {
            if let Some(v) = v {
                fields.push(format!("\"{name}\": {}", number(v)));
            }
        };
        float_field("hermiticity_tol", tol.hermiticity_tol);
        float_field("rank_tol", tol.rank_tol);
        float_field("crossing_tol", tol.crossing_tol);
        float_field(
            "optimizer_relative_tolerance",
            tol.optimizer_relative_tolerance,
        );
        if let Some(v) = tol.optimizer_starts {
            fields.push(format!("\"optimizer_starts\": {v}"));
        }
        if let Some(v) = tol.optimizer_max_iterations {
            fields.push(format!("\"optimizer_max_iterations\": {v}"));
        }
        if let Some(v) = tol.optimizer_seed {
            fields.push(format!("\"optimizer_seed\": {v}"));
        }
        blocks.push(format!("  \"tolerances\": {{ {} }}", fields.join(", ")));
    }
    format!("{{\n{}\n}}", blocks.join(",\n"))
}

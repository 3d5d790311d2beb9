//! Classical-quantum channels: validation, random generation, the diagonal
//! (classical) embedding, and the `cq-channel/1` JSON file format.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::matcore::{
    herm_eig, hermiticity_defect, mat_pow, CMatrix, Complex, DensityMatrix, HermitianMatrix, Tolerances,
    DEFAULT_TOLERANCES,
};

pub const FORMAT_TAG: &str = "cq-channel/1";
pub const GINIBRE_ENSEMBLE: &str = "ginibre-full-rank";

/// Smallest eigenvalue a generated state may have before it is re-drawn.
const MIN_GENERATED_EIGENVALUE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum ViolationKind {
    Dimension { expected: usize, found: (usize, usize) },
    NonFinite,
    Hermiticity,
    Trace,
    NegativeEigenvalue,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    /// Index of the offending state.
    pub index: usize,
    pub kind: ViolationKind,
    /// Size of the violation: `|H - H*|` max entry, `|Tr - 1|`, or `-λ_min`.
    pub magnitude: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for v in &self.violations {
            match &v.kind {
                ViolationKind::Dimension { expected, found } => writeln!(
                    f,
                    "state {}: dimension {}x{} but header says d={}",
                    v.index, found.0, found.1, expected
                )?,
                ViolationKind::NonFinite => writeln!(f, "state {}: non-finite entries", v.index)?,
                ViolationKind::Hermiticity => {
                    writeln!(f, "state {}: not Hermitian, max |H - H*| = {:e}", v.index, v.magnitude)?
                }
                ViolationKind::Trace => writeln!(f, "state {}: trace deviates from 1 by {:e}", v.index, v.magnitude)?,
                ViolationKind::NegativeEigenvalue => {
                    writeln!(f, "state {}: eigenvalue -{:e} is negative", v.index, v.magnitude)?
                }
            }
        }
        Ok(())
    }
}

/// Checks every density-matrix invariant of raw channel outputs.
pub fn validate_states(states: &[CMatrix], d: usize, tol: &Tolerances) -> ValidationReport {
    let mut violations = Vec::new();
    for (index, m) in states.iter().enumerate() {
        if m.nrows() != d || m.ncols() != d {
            violations.push(Violation {
                index,
                kind: ViolationKind::Dimension {
                    expected: d,
                    found: (m.nrows(), m.ncols()),
                },
                magnitude: 0.0,
            });
            continue;
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            violations.push(Violation {
                index,
                kind: ViolationKind::NonFinite,
                magnitude: f64::NAN,
            });
            continue;
        }
        let defect = hermiticity_defect(m);
        if defect > tol.hermitian {
            violations.push(Violation {
                index,
                kind: ViolationKind::Hermiticity,
                magnitude: defect,
            });
        }
        let h = HermitianMatrix::hermitian_part_of(m);
        let dev = (h.trace() - 1.0).abs();
        if dev > tol.trace {
            violations.push(Violation {
                index,
                kind: ViolationKind::Trace,
                magnitude: dev,
            });
        }
        match herm_eig(&h) {
            Ok(eig) if eig.min() < -tol.psd => violations.push(Violation {
                index,
                kind: ViolationKind::NegativeEigenvalue,
                magnitude: -eig.min(),
            }),
            Ok(_) => {}
            Err(_) => violations.push(Violation {
                index,
                kind: ViolationKind::NonFinite,
                magnitude: f64::NAN,
            }),
        }
    }
    ValidationReport { violations }
}

/// A classical-quantum channel `j ↦ W(j)` over input alphabet `{0, …, n-1}`.
///
/// Immutable once built; every state is a validated density matrix of the
/// same dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct CQChannel {
    states: Vec<DensityMatrix>,
    d: usize,
    ensemble: String,
    seed: Option<u64>,
}

impl CQChannel {
    pub fn new(states: Vec<DensityMatrix>) -> Result<Self> {
        Self::with_provenance(states, "user", None)
    }

    pub fn with_provenance(states: Vec<DensityMatrix>, ensemble: &str, seed: Option<u64>) -> Result<Self> {
        let Some(first) = states.first() else {
            return Err(Error::invalid("a channel needs at least one input letter"));
        };
        let d = first.dim();
        if let Some((j, s)) = states.iter().enumerate().find(|(_, s)| s.dim() != d) {
            return Err(Error::Validation(ValidationReport {
                violations: vec![Violation {
                    index: j,
                    kind: ViolationKind::Dimension {
                        expected: d,
                        found: (s.dim(), s.dim()),
                    },
                    magnitude: 0.0,
                }],
            }));
        }
        Ok(Self {
            states,
            d,
            ensemble: ensemble.to_owned(),
            seed,
        })
    }

    /// Builds a channel from raw matrices, rejecting any invariant violation.
    pub fn from_matrices(matrices: Vec<CMatrix>, ensemble: &str, seed: Option<u64>) -> Result<Self> {
        let Some(first) = matrices.first() else {
            return Err(Error::invalid("a channel needs at least one input letter"));
        };
        let d = first.nrows();
        let report = validate_states(&matrices, d, &DEFAULT_TOLERANCES);
        if !report.is_valid() {
            return Err(Error::Validation(report));
        }
        let states = matrices
            .iter()
            .map(|m| DensityMatrix::new_unchecked(HermitianMatrix::hermitian_part_of(m)))
            .collect();
        Self::with_provenance(states, ensemble, seed)
    }

    pub fn n(&self) -> usize {
        self.states.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn ensemble(&self) -> &str {
        &self.ensemble
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn validate(&self) -> ValidationReport {
        self.validate_with(&DEFAULT_TOLERANCES)
    }

    pub fn validate_with(&self, tol: &Tolerances) -> ValidationReport {
        let raw: Vec<CMatrix> = self.states.iter().map(|s| s.as_matrix().clone()).collect();
        validate_states(&raw, self.d, tol)
    }

    /// Precomputes `W(j)^α` for every letter.
    pub fn powered(&self, alpha: f64) -> Result<PoweredChannel> {
        PoweredChannel::new(self, alpha)
    }

    /// SHA-256 of the canonical JSON serialization, hex encoded.
    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(to_json_string(self).as_bytes()))
    }
}

/// The outputs `W(j)^α` of a channel for one fixed order `α`.
///
/// Every solver iteration consumes these powers; computing them once per
/// session is purely a cache and never changes results.
#[derive(Clone, Debug)]
pub struct PoweredChannel {
    alpha: f64,
    d: usize,
    states: Vec<HermitianMatrix>,
}

impl PoweredChannel {
    pub fn new(ch: &CQChannel, alpha: f64) -> Result<Self> {
        crate::matcore::check_order(alpha)?;
        let states = ch
            .states()
            .iter()
            .map(|s| mat_pow(s, alpha))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            alpha,
            d: ch.d(),
            states,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n(&self) -> usize {
        self.states.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn states(&self) -> &[HermitianMatrix] {
        &self.states
    }
}

/// A classical channel: row `j` is the output distribution for input `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalChannel {
    rows: Vec<Vec<f64>>,
}

impl ClassicalChannel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::invalid("a channel needs at least one input letter"));
        };
        let d = first.len();
        if d == 0 {
            return Err(Error::invalid("output alphabet must be non-empty"));
        }
        for (j, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::invalid(format!(
                    "row {j} has length {} instead of {d}",
                    row.len()
                )));
            }
            if row.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
                return Err(Error::invalid(format!("row {j} has negative or non-finite entries")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-10 {
                return Err(Error::invalid(format!("row {j} sums to {s}")));
            }
        }
        Ok(Self { rows })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn d(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Random channel with rows drawn uniformly from the simplex.
    pub fn random(n: usize, d: usize, seed: u64) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::invalid("classical channel needs n >= 1 and d >= 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..n)
            .map(|_| {
                let e: Vec<f64> = (0..d).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
                let s: f64 = e.iter().sum();
                e.into_iter().map(|x| x / s).collect()
            })
            .collect();
        Self::new(rows)
    }
}

/// Embeds a classical channel as diagonal output states.
pub fn embed_classical(cc: &ClassicalChannel) -> CQChannel {
    let states = cc
        .rows()
        .iter()
        .map(|row| DensityMatrix::new_unchecked(HermitianMatrix::from_real_diagonal(row)))
        .collect();
    CQChannel::with_provenance(states, "classical", None).expect("rows share one length")
}

/// Inverse of [`embed_classical`]; fails if any state has off-diagonal weight.
pub fn extract_classical(ch: &CQChannel) -> Result<ClassicalChannel> {
    let mut rows = Vec::with_capacity(ch.n());
    for (j, s) in ch.states().iter().enumerate() {
        let m = s.as_matrix();
        let off = (0..ch.d())
            .flat_map(|r| (0..ch.d()).map(move |c| (r, c)))
            .filter(|(r, c)| r != c)
            .map(|(r, c)| m[(r, c)].norm())
            .fold(0.0, f64::max);
        if off > DEFAULT_TOLERANCES.hermitian {
            return Err(Error::invalid(format!(
                "state {j} is not diagonal (off-diagonal {off:e})"
            )));
        }
        rows.push(s.diagonal());
    }
    ClassicalChannel::new(rows)
}

/// `n = d` orthogonal pure states `|j⟩⟨j|`.
pub fn orthogonal_pure_channel(n: usize) -> Result<CQChannel> {
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    let states = (0..n)
        .map(|j| DensityMatrix::basis_state(n, j))
        .collect::<Result<Vec<_>>>()?;
    CQChannel::with_provenance(states, "orthogonal-pure", None)
}

/// Every letter maps to the same state `rho`.
pub fn constant_channel(n: usize, rho: &DensityMatrix) -> Result<CQChannel> {
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    CQChannel::with_provenance(vec![rho.clone(); n], "constant", None)
}

fn ginibre_state(d: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex::new(re, im)
    });
    let gg = &g * g.adjoint();
    let h = HermitianMatrix::hermitian_part_of(&gg);
    let tr = h.trace();
    h.scale(1.0 / tr).into_inner()
}

/// Random channel with full-rank Ginibre states `G G* / Tr(G G*)`.
///
/// State `j` is drawn from its own ChaCha stream so that identical seeds
/// reproduce identical channels bit for bit.
pub fn random_channel(n: usize, d: usize, seed: u64) -> Result<CQChannel> {
    if n == 0 || d == 0 {
        return Err(Error::invalid(format!(
            "random_channel needs n >= 1 and d >= 1, got n={n}, d={d}"
        )));
    }
    let mut states = Vec::with_capacity(n);
    for j in 0..n {
        let mut attempt = 0u64;
        loop {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(((j as u64) << 16) | attempt);
            let m = ginibre_state(d, &mut rng);
            let h = HermitianMatrix::hermitian_part_of(&m);
            let min = herm_eig(&h)?.min();
            if min > MIN_GENERATED_EIGENVALUE {
                states.push(DensityMatrix::new_unchecked(h));
                break;
            }
            log::warn!(
                "state {j}: min eigenvalue {min:e} too small, re-drawing with sub-seed {}",
                attempt + 1
            );
            attempt += 1;
        }
    }
    CQChannel::with_provenance(states, GINIBRE_ENSEMBLE, Some(seed))
}

fn fmt_num(x: f64) -> String {
    // 17 significant digits, always a valid JSON number
    format!("{x:.16e}")
}

/// Serializes a channel in the `cq-channel/1` format.
pub fn to_json_string(ch: &CQChannel) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!("  \"format\": \"{FORMAT_TAG}\",\n"));
    out.push_str(&format!("  \"n\": {},\n", ch.n()));
    out.push_str(&format!("  \"d\": {},\n", ch.d()));
    out.push_str(&format!(
        "  \"ensemble\": {},\n",
        serde_json::to_string(ch.ensemble()).expect("strings serialize")
    ));
    if let Some(seed) = ch.seed() {
        out.push_str(&format!("  \"seed\": {seed},\n"));
    }
    out.push_str("  \"states\": [\n");
    for (j, s) in ch.states().iter().enumerate() {
        let m = s.as_matrix();
        let rows: Vec<String> = (0..ch.d())
            .map(|r| {
                let cells: Vec<String> = (0..ch.d())
                    .map(|c| format!("[{}, {}]", fmt_num(m[(r, c)].re), fmt_num(m[(r, c)].im)))
                    .collect();
                format!("[{}]", cells.join(", "))
            })
            .collect();
        out.push_str("    [");
        out.push_str(&rows.join(",\n     "));
        out.push(']');
        if j + 1 < ch.n() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("  ]\n}\n");
    out
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelFile {
    format: String,
    n: usize,
    d: usize,
    ensemble: String,
    #[serde(default)]
    seed: Option<u64>,
    states: Vec<Vec<Vec<[f64; 2]>>>,
}

/// Parses a `cq-channel/1` document.
pub fn from_json_str(text: &str) -> Result<CQChannel> {
    let file: ChannelFile = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    if file.format != FORMAT_TAG {
        return Err(Error::Parse(format!(
            "field \"format\": expected \"{FORMAT_TAG}\", found \"{}\"",
            file.format
        )));
    }
    if file.n == 0 || file.d == 0 {
        return Err(Error::Parse("fields \"n\" and \"d\" must be positive".into()));
    }
    if file.states.len() != file.n {
        return Err(Error::Parse(format!(
            "field \"states\": header n={} but {} states present",
            file.n,
            file.states.len()
        )));
    }
    let mut matrices = Vec::with_capacity(file.n);
    let mut dim_violations = Vec::new();
    for (j, rows) in file.states.iter().enumerate() {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if nrows != file.d || rows.iter().any(|r| r.len() != file.d) {
            dim_violations.push(Violation {
                index: j,
                kind: ViolationKind::Dimension {
                    expected: file.d,
                    found: (nrows, ncols),
                },
                magnitude: 0.0,
            });
            continue;
        }
        matrices.push(CMatrix::from_fn(file.d, file.d, |r, c| {
            Complex::new(rows[r][c][0], rows[r][c][1])
        }));
    }
    if !dim_violations.is_empty() {
        return Err(Error::Validation(ValidationReport {
            violations: dim_violations,
        }));
    }
    CQChannel::from_matrices(matrices, &file.ensemble, file.seed)
}

/// Writes `contents` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("not a file path: {}", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", file_name.to_string_lossy()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn save_channel(ch: &CQChannel, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), to_json_string(ch).as_bytes())
}

pub fn load_channel(path: impl AsRef<Path>) -> Result<CQChannel> {
    let text = fs::read_to_string(path)?;
    from_json_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qubit_channel() -> CQChannel {
        CQChannel::new(vec![
            DensityMatrix::from_real_diagonal(&[0.9, 0.1]).unwrap(),
            DensityMatrix::maximally_mixed(2),
        ])
        .unwrap()
    }

    #[test]
    fn valid_channel_has_empty_report() {
        assert!(qubit_channel().validate().is_valid());
    }

    #[test]
    fn trace_violation_is_reported() {
        let good = DensityMatrix::maximally_mixed(2).into_hermitian().into_inner();
        let bad = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex::new(0.51, 0.0),
            Complex::new(0.5, 0.0),
        ]));
        let report = validate_states(&[good, bad], 2, &DEFAULT_TOLERANCES);
        assert_eq!(report.violations.len(), 1);
        let v = &report.violations[0];
        assert_eq!(v.index, 1);
        assert_eq!(v.kind, ViolationKind::Trace);
        assert!((v.magnitude - 0.01).abs() < 1e-12);
    }

    #[test]
    fn hermiticity_violation_is_reported() {
        let mut m = DensityMatrix::maximally_mixed(2).into_hermitian().into_inner();
        m[(0, 1)] += Complex::new(1e-6, 0.0);
        let report = validate_states(&[m], 2, &DEFAULT_TOLERANCES);
        let v = report
            .violations
            .iter()
            .find(|v| v.kind == ViolationKind::Hermiticity)
            .unwrap();
        assert!((v.magnitude - 1e-6).abs() < 1e-15);
    }

    #[test]
    fn random_channel_is_deterministic_and_valid() {
        let a = random_channel(2, 2, 7).unwrap();
        let b = random_channel(2, 2, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(to_json_string(&a), to_json_string(&b));
        assert_ne!(a, random_channel(2, 2, 8).unwrap());
        for seed in 0..100 {
            let ch = random_channel(3, 3, seed).unwrap();
            assert!(ch.validate().is_valid(), "seed {seed}");
            for s in ch.states() {
                assert!(herm_eig(s).unwrap().min() > MIN_GENERATED_EIGENVALUE);
            }
        }
    }

    #[test]
    fn random_channel_rejects_empty_shapes() {
        assert!(matches!(random_channel(0, 2, 1), Err(Error::InvalidParameter(_))));
        assert!(matches!(random_channel(2, 0, 1), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn full_scale_generation() {
        let ch = random_channel(128, 32, 1).unwrap();
        assert_eq!((ch.n(), ch.d()), (128, 32));
        assert!(ch.validate().is_valid());
    }

    #[test]
    fn classical_embedding_examples() {
        let bsc = ClassicalChannel::new(vec![vec![0.9, 0.1], vec![0.1, 0.9]]).unwrap();
        let ch = embed_classical(&bsc);
        assert_eq!(ch.states()[0].diagonal(), vec![0.9, 0.1]);
        let id = ClassicalChannel::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let ch = embed_classical(&id);
        assert_eq!(ch.states()[0], DensityMatrix::basis_state(2, 0).unwrap());
        assert_eq!(ch.states()[1], DensityMatrix::basis_state(2, 1).unwrap());
    }

    #[test]
    fn classical_round_trip() {
        for seed in 0..20 {
            let cc = ClassicalChannel::random(3, 4, seed).unwrap();
            assert_eq!(extract_classical(&embed_classical(&cc)).unwrap(), cc);
        }
        assert!(extract_classical(&random_channel(2, 2, 1).unwrap()).is_err());
    }

    #[test]
    fn json_round_trip() {
        let ch = random_channel(3, 4, 99).unwrap();
        let back = from_json_str(&to_json_string(&ch)).unwrap();
        assert_eq!(back.seed(), Some(99));
        assert_eq!(back.ensemble(), GINIBRE_ENSEMBLE);
        assert_eq!(back, ch);
        assert_eq!(back.content_hash(), ch.content_hash());
    }

    #[test]
    fn truncated_file_is_a_parse_error() {
        let text = to_json_string(&qubit_channel());
        let cut = &text[..text.len() / 2];
        match from_json_str(cut) {
            Err(Error::Parse(msg)) => assert!(msg.contains("line")),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn dimension_mismatch_names_state() {
        let text = to_json_string(&qubit_channel()).replace("\"d\": 2", "\"d\": 3");
        match from_json_str(&text) {
            Err(Error::Validation(report)) => {
                assert_eq!(report.violations[0].index, 0);
                assert!(matches!(
                    report.violations[0].kind,
                    ViolationKind::Dimension { expected: 3, .. }
                ));
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn invalid_state_in_file_is_rejected() {
        let text = to_json_string(&qubit_channel()).replacen("9.0000000000000002e-1", "9.5e-1", 1);
        assert!(matches!(from_json_str(&text), Err(Error::Validation(_))));
    }

    #[test]
    fn numbers_carry_17_significant_digits() {
        assert_eq!(fmt_num(0.5), "5.0000000000000000e-1");
        let x = 0.1 + 0.2;
        assert_eq!(fmt_num(x).parse::<f64>().unwrap(), x);
    }
}

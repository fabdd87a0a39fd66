//! Runtime identity suites. Every check records where the identity lives,
//! which arithmetic backend evaluated it, the tolerance, and what was seen.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chebyshev;
use crate::coupling::{self, RootBranch};
use crate::crt;
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{BasisTag, ChiralRing, ModelParams, RingElement};
use crate::pairing;
use crate::toda::{self, BoundaryCondition, FamilyKind, ManufacturedFamily, RadialGrid, SolverConfig};

/// Default seed for randomized checks.
pub const DEFAULT_SEED: u64 = 0x5eed_2024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Exact,
    Float,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Residue,
    Eta,
    Crt,
    Theta,
    Lemma,
    Eigen,
    Solver,
    All,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Residue,
        Suite::Eta,
        Suite::Crt,
        Suite::Theta,
        Suite::Lemma,
        Suite::Eigen,
        Suite::Solver,
    ];
}

impl std::str::FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "residue" => Suite::Residue,
            "eta" => Suite::Eta,
            "crt" => Suite::Crt,
            "theta" => Suite::Theta,
            "lemma" => Suite::Lemma,
            "eigen" => Suite::Eigen,
            "solver" => Suite::Solver,
            "all" => Suite::All,
            other => return Err(format!("unknown suite `{other}`")),
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub module: &'static str,
    pub operation: &'static str,
    pub identity: String,
    pub backend: Backend,
    pub tolerance: f64,
    pub observed: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub n: usize,
    pub c: BigRational,
    pub t: Complex64,
    /// Largest degree for the division-lemma suite.
    pub dmax: usize,
    pub seed: u64,
    pub threads: usize,
}

impl VerifyOptions {
    pub fn new(n: usize, c: BigRational) -> Self {
        Self {
            n,
            c,
            t: Complex64::one(),
            dmax: 12,
            seed: DEFAULT_SEED,
            threads: 0,
        }
    }

    fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.n, self.c_f64(), self.t)
    }

    fn c_f64(&self) -> f64 {
        self.c.to_f64().unwrap_or(f64::NAN)
    }
}

struct Recorder {
    checks: Vec<Check>,
}

impl Recorder {
    fn new() -> Self {
        Self { checks: Vec::new() }
    }

    fn float(&mut self, module: &'static str, operation: &'static str, identity: impl Into<String>, tolerance: f64, observed: f64) {
        self.checks.push(Check {
            module,
            operation,
            identity: identity.into(),
            backend: Backend::Float,
            tolerance,
            observed,
            passed: observed <= tolerance,
        });
    }

    fn exact(&mut self, module: &'static str, operation: &'static str, identity: impl Into<String>, holds: bool) {
        self.checks.push(Check {
            module,
            operation,
            identity: identity.into(),
            backend: Backend::Exact,
            tolerance: 0.0,
            observed: if holds { 0.0 } else { 1.0 },
            passed: holds,
        });
    }

    /// Records a failed computation as a failed check instead of aborting the suite.
    fn error(&mut self, module: &'static str, operation: &'static str, identity: impl Into<String>, err: &Error) {
        self.checks.push(Check {
            module,
            operation,
            identity: format!("{} (error: {err})", identity.into()),
            backend: Backend::Float,
            tolerance: 0.0,
            observed: f64::INFINITY,
            passed: false,
        });
    }
}

pub fn run(suite: Suite, opts: &VerifyOptions) -> Result<Vec<SuiteReport>> {
    let suites: Vec<Suite> = if suite == Suite::All { Suite::ALL.to_vec() } else { vec![suite] };
    let params = opts.params()?;
    suites
        .into_iter()
        .map(|s| {
            let mut rec = Recorder::new();
            match s {
                Suite::Residue => residue_suite(&params, &mut rec),
                Suite::Eta => eta_suite(opts, &params, &mut rec),
                Suite::Crt => crt_suite(&params, &mut rec),
                Suite::Theta => theta_suite(opts, &params, &mut rec),
                Suite::Lemma => lemma_suite(opts, &mut rec),
                Suite::Eigen => eigen_suite(&params, &mut rec),
                Suite::Solver => solver_suite(opts, &mut rec),
                Suite::All => unreachable!(),
            }
            let passed = rec.checks.iter().all(|c| c.passed);
            Ok(SuiteReport {
                suite: s,
                passed,
                checks: rec.checks,
            })
        })
        .collect()
}

fn max_coeff_diff(a: &RingElement<Complex64>, b: &RingElement<Complex64>) -> f64 {
    a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn rel(err: f64, scale: f64) -> f64 {
    err / scale.max(1.0)
}

fn residue_suite(params: &ModelParams, rec: &mut Recorder) {
    let ring = params.ring();
    let n = params.n;
    let mut worst: f64 = 0.0;
    for k in 0..=(4 * n - 2) {
        match pairing::grothendieck_residue(&ring.x_pow(k), params) {
            Ok(direct) => {
                let closed = pairing::residue_closed_form::<f64>(k, params);
                worst = worst.max(rel((direct - closed).norm(), closed.norm()));
            }
            Err(e) => return rec.error("pairing", "grothendieck_residue", "critical-point sum of x^k", &e),
        }
    }
    rec.float(
        "pairing",
        "grothendieck_residue",
        format!("critical-point sum equals closed form for x^k, k <= {}", 4 * n - 2),
        1e-10,
        worst,
    );
    let exact_ring = ChiralRing::new(n, BigRational::zero()).expect("valid n");
    let top = pairing::normalized_residue(&exact_ring, &exact_ring.x_pow(2 * n - 1)).expect("monomial");
    rec.exact("pairing", "normalized_residue", "t Res[x^{2n-1}] = 1", top == BigRational::one());
}

fn eta_suite(opts: &VerifyOptions, params: &ModelParams, rec: &mut Recorder) {
    let n = opts.n;
    let ring = ChiralRing::new(n, opts.c.clone()).expect("valid n");
    for (basis, expect, name) in [
        (BasisTag::Monomial, pairing::monomial_block_form(n, &opts.c), "monomial pairing is [[0,J],[J,-2cJ]]"),
        (BasisTag::Shifted, pairing::shifted_block_form(n), "shifted pairing is [[0,J],[J,0]]"),
    ] {
        match pairing::eta_matrix_exact(&ring, basis) {
            Ok(eta) => rec.exact("pairing", "eta_matrix", name, eta.entries == expect),
            Err(e) => rec.error("pairing", "eta_matrix", name, &e),
        }
    }
    let c = Complex64::new(params.c, 0.0);
    match pairing::eta_matrix(BasisTag::Monomial, params) {
        Ok(eta) => {
            let expect = pairing::monomial_block_form(n, &c);
            rec.float("pairing", "eta_matrix", "residue-sum pairing matches block form", 1e-10, linalg::max_abs_diff(&eta.entries, &expect));
            rec.float("pairing", "eta_matrix", "pairing is symmetric", 1e-12, eta.asymmetry());
        }
        Err(e) => rec.error("pairing", "eta_matrix", "residue-sum pairing matches block form", &e),
    }
}

fn crt_suite(params: &ModelParams, rec: &mut Recorder) {
    let dim = params.dim();
    let ring = params.ring();
    let deltas = match crt::delta_basis(params) {
        Ok(d) => d,
        Err(e) => return rec.error("crt", "delta_basis", "idempotent basis", &e),
    };
    let mut worst: f64 = 0.0;
    for (i, di) in deltas.iter().enumerate() {
        for (j, dj) in deltas.iter().enumerate() {
            let prod = ring.mul(di, dj).expect("same basis");
            let expect = if i == j { di.clone() } else { ring.zero() };
            worst = worst.max(max_coeff_diff(&prod, &expect));
        }
    }
    rec.float("crt", "delta_basis", "delta_i delta_j = [i = j] delta_i", 1e-10, worst);
    let sum = deltas.iter().fold(ring.zero(), |acc, d| ring.add(&acc, d).expect("same basis"));
    rec.float("crt", "delta_basis", "idempotents sum to 1", 1e-10, max_coeff_diff(&sum, &ring.one()));
    let v = crt::vandermonde(params);
    let eta_delta = pairing::eta_delta_closed_form(params);
    let mono = pairing::monomial_block_form(params.n, &Complex64::new(params.c, 0.0));
    let congruent = linalg::congruence(&v, &eta_delta.entries);
    rec.float("crt", "vandermonde", "V eta_delta V^T equals monomial pairing", 1e-10, linalg::max_abs_diff(&congruent, &mono));
    if let Ok(d) = crt::delta_coordinate_matrix(params) {
        let id = DMatrix::<Complex64>::identity(dim, dim);
        rec.float("crt", "vandermonde", "V is inverse to idempotent coordinates", 1e-10, linalg::max_abs_diff(&(&v * d), &id));
    }
    match pairing::eta_matrix(BasisTag::Delta, params) {
        Ok(eta) => rec.float("pairing", "eta_matrix", "idempotent pairing matches closed diagonal", 1e-10, linalg::max_abs_diff(&eta.entries, &eta_delta.entries)),
        Err(e) => rec.error("pairing", "eta_matrix", "idempotent pairing matches closed diagonal", &e),
    }
}

fn random_element(rng: &mut ChaCha8Rng, ring: &ChiralRing<Complex64>) -> RingElement<Complex64> {
    let coeffs = (0..ring.dim())
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    ring.element(coeffs).expect("dimension")
}

fn theta_suite(opts: &VerifyOptions, params: &ModelParams, rec: &mut Recorder) {
    let n = params.n;
    let dim = params.dim();
    let ring = params.ring();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let u = random_element(&mut rng, &ring);
        let v = random_element(&mut rng, &ring);
        let lhs = crt::theta_apply(&ring.mul(&u, &v).expect("same basis"), n).expect("monomial");
        let rhs = ring
            .mul(&crt::theta_apply(&u, n).expect("monomial"), &crt::theta_apply(&v, n).expect("monomial"))
            .expect("same basis");
        let scale = lhs.coeffs.iter().map(|z| z.norm()).fold(1.0, f64::max);
        worst = worst.max(max_coeff_diff(&lhs, &rhs) / scale);
    }
    rec.float("crt", "theta_apply", "theta(uv) = theta(u) theta(v), 100 seeded pairs", 1e-12, worst);

    let perm = crt::theta_matrix(BasisTag::Delta, n).expect("delta basis");
    let mut power = DMatrix::<Complex64>::identity(dim, dim);
    for _ in 0..n {
        power = &power * &perm;
    }
    rec.exact("crt", "theta_matrix", "theta^n = id on idempotents", power == DMatrix::identity(dim, dim));
    let t = crt::theta_matrix(BasisTag::Monomial, n).expect("monomial basis");
    let mut tp = DMatrix::<Complex64>::identity(dim, dim);
    for _ in 0..n {
        tp = &tp * &t;
    }
    rec.float("crt", "theta_matrix", "theta^n = id on monomials", 1e-12, linalg::max_abs_diff(&tp, &DMatrix::identity(dim, dim)));

    let m = DMatrix::from_fn(dim, dim, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let proj = crt::commutant_projection(&m, n);
    rec.float("crt", "commutant_projection", "matrices commuting with theta lie in the i = j mod n pattern", 1e-12, crt::off_pattern_magnitude(&proj, &crt::invariant_pattern(n)));

    let omega = params.roots().omega;
    let mono = pairing::monomial_block_form(n, &Complex64::new(params.c, 0.0));
    let rotated = linalg::congruence(&t, &mono);
    rec.float("crt", "theta_matrix", "theta rescales the pairing by omega^{-1}", 1e-12, linalg::max_abs_diff(&rotated, &(&mono * omega.conj())));
    let c = coupling::c_matrix(&ring);
    let t_inv = t.map(|z| z.conj());
    rec.float("coupling", "c_matrix", "theta^{-1} C theta = omega C", 1e-12, linalg::max_abs_diff(&(&t_inv * &c * &t), &(&c * omega)));
}

fn lemma_suite(opts: &VerifyOptions, rec: &mut Recorder) {
    let all = (0..=opts.dmax).all(|d| chebyshev::division_lemma(d).holds());
    rec.exact("chebyshev", "division_lemma", format!("x^(d+2) = Q (x^2 + 2tx - 1) + U~_(d+1) x + U~_d, d <= {}", opts.dmax), all);
    for n in 1..=opts.n {
        let ring = ChiralRing::new(n, opts.c.clone()).expect("valid n");
        match coupling::closure_direct(&ring) {
            Ok(direct) => rec.exact(
                "coupling",
                "closure_data",
                format!("(A_n, B_n) by reduction equals Chebyshev route, n = {n}"),
                direct == coupling::closure_via_lemma(n, &opts.c),
            ),
            Err(e) => rec.error("coupling", "closure_data", format!("C^n(1) in span{{1, x^n}}, n = {n}"), &e),
        }
    }
}

fn eigen_suite(params: &ModelParams, rec: &mut Recorder) {
    let n = params.n;
    let ring = params.ring();
    let p = coupling::coupling_element(&ring);
    let power = ring.pow(&p, n).expect("same basis");
    let off_span = power
        .coeffs
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != 0 && *k != n)
        .map(|(_, z)| z.norm())
        .fold(0.0, f64::max);
    rec.float("coupling", "closure_data", "C^n(1) lies in span{1, x^n}", 1e-12, off_span);
    let split = match coupling::eigen_split(params) {
        Ok(s) => s,
        Err(e) => return rec.error("coupling", "eigen_split", "eigen-splitting of C^n", &e),
    };
    for (v, ev, name) in [(&split.phi, split.lambda, "C^n phi = lambda phi"), (&split.phi_prime, split.mu, "C^n phi' = mu phi'")] {
        let img = ring.mul(&power, v).expect("same basis");
        let err = img.coeffs.iter().zip(&v.coeffs).map(|(a, b)| (a - ev * b).norm()).fold(0.0, f64::max);
        rec.float("coupling", "eigen_split", name, 1e-10, rel(err, ev.norm()));
    }
    match coupling::interleaved_basis(params, RootBranch::default()) {
        Ok(ib) => {
            rec.float("coupling", "interleaved_basis", "C is block-cyclic with blocks diag(lambda^{1/n}, mu^{1/n})", 1e-12, ib.off_pattern());
            match ib.eta(params) {
                Ok(eta) => {
                    let scale = linalg::max_abs(&eta.entries);
                    let mut off: f64 = 0.0;
                    for i in 0..2 * n {
                        for j in 0..2 * n {
                            if !(i / 2 + j / 2 == n - 1 && i % 2 == j % 2) {
                                off = off.max(eta.entries[(i, j)].norm());
                            }
                        }
                    }
                    rec.float("coupling", "interleaved_basis", "interleaved pairing pairs block j with block n-1-j", 1e-10, off / scale.max(1e-300));
                }
                Err(e) => rec.error("coupling", "interleaved_basis", "interleaved pairing", &e),
            }
        }
        Err(e) => rec.error("coupling", "interleaved_basis", "interleaved basis", &e),
    }
}

fn solver_suite(opts: &VerifyOptions, rec: &mut Recorder) {
    let n = opts.n;
    let grid = RadialGrid::new(1.0, 2.0, 33).expect("valid grid");
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for kind in [FamilyKind::Diagonal, FamilyKind::NonDiagonal] {
        let fam = ManufacturedFamily::standard(kind, n);
        let exact = fam.state(grid).expect("valid family");
        let mut start = exact.clone();
        for row in start.blocks.iter_mut() {
            let last = row.len() - 1;
            for b in row[1..last].iter_mut() {
                for v in b.g.iter_mut() {
                    *v *= 1.0 + 0.1 * rng.random_range(-1.0..1.0);
                }
                b.g = toda::block::hermitize(&b.g);
            }
        }
        let mut cfg = SolverConfig::new(BoundaryCondition::Manufactured(fam));
        cfg.threads = opts.threads;
        let name = format!("{kind:?} manufactured solution recovered from 10% noise");
        match toda::solve(&start, &cfg) {
            Ok((sol, rep)) => {
                rec.float("toda_solver", "solve", name, 1e-6, if rep.converged { sol.sup_distance(&exact) } else { f64::INFINITY });
                rec.float("toda_solver", "solve", "accepted steps keep blocks hermitian", 1e-12, rep.hermiticity_drift);
            }
            Err(e) => rec.error("toda_solver", "solve", name, &e),
        }
    }
    let state = ManufacturedFamily::standard(FamilyKind::NonDiagonal, n).state(grid).expect("valid family");
    if let (Ok(base), Ok(shifted)) = (toda::toda_residual(&state), toda::toda_residual(&state.shifted(1))) {
        let err = (0..n)
            .map(|j| base.values[(j + 1) % n].iter().zip(&shifted.values[j]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        rec.float("toda_solver", "toda_residual", "relabeling j -> j+1 shifts the residual field", 1e-12, err);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass_for_sample_parameters() {
        let mut opts = VerifyOptions::new(3, BigRational::new(1.into(), 2.into()));
        opts.dmax = 8;
        for report in run(Suite::All, &opts).unwrap() {
            let failures: Vec<_> = report.failures().collect();
            assert!(report.passed, "{:?}: {failures:?}", report.suite);
        }
    }

    #[test]
    fn seed_changes_nothing_but_random_inputs() {
        let opts = VerifyOptions::new(2, BigRational::new(3.into(), 10.into()));
        let a = run(Suite::Theta, &opts).unwrap();
        let b = run(Suite::Theta, &opts).unwrap();
        assert_eq!(a[0].checks[0].observed, b[0].checks[0].observed);
    }
}

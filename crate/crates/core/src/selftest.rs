//! End-to-end invariant sweep over seeded random schemes and states.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{
    closure_sum, fold_quadrilateral, random_quadruple, FoldDiagonal, PlanarQuadrilateral,
    PurityClass, SamplerOptions,
};
use crate::io::{self, FileKind, SchemeFile};
use crate::multiqubit::{self, TensorScheme, VerifyMode, TENSOR_TOL};
use crate::scheme::{scheme_diagnostics, Spin12Scheme};
use crate::states;
use crate::tolerance::Tolerances;
use crate::tomography::{self, derive_seed, Tomogram};

pub const DEFAULT_ITERATIONS: usize = 200;

const MODES: [PurityClass; 3] = [PurityClass::AllPure, PurityClass::AllMixed, PurityClass::Heterogeneous];

/// One row of the self-test table: the worst value seen over `cases`
/// evaluations against a fixed bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub cases: usize,
    pub worst: f64,
    pub bound: f64,
    pub failures: usize,
    /// First failure message, if any.
    pub detail: Option<String>,
}

impl SuiteResult {
    fn new(name: &str, bound: f64) -> Self {
        SuiteResult {
            name: name.into(),
            cases: 0,
            worst: 0.0,
            bound,
            failures: 0,
            detail: None,
        }
    }

    fn record(&mut self, value: f64) {
        self.cases += 1;
        if value.is_nan() || value > self.worst {
            self.worst = value;
        }
        if !(value <= self.bound) {
            self.failures += 1;
        }
    }

    fn fail(&mut self, message: String) {
        self.cases += 1;
        self.failures += 1;
        self.detail.get_or_insert(message);
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub iterations: usize,
    pub suites: Vec<SuiteResult>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }
}

fn random_scheme(seed: u64, mode: PurityClass) -> Result<Spin12Scheme, String> {
    let q = random_quadruple(seed, mode, &SamplerOptions::default()).map_err(|e| e.to_string())?;
    Spin12Scheme::new(q, format!("random-{seed}"), Tolerances::default()).map_err(|e| e.to_string())
}

/// Runs every suite with `iterations` random cases per purity class where
/// applicable.
pub fn run(seed: u64, iterations: usize) -> SelftestReport {
    let tols = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut closure = SuiteResult::new("sampled quadruples close", 1e-12);
    let mut fold = SuiteResult::new("folds close and keep side lengths", 1e-12);
    let mut diag = SuiteResult::new("scheme identity suite (failed checks)", 0.0);
    let mut round_trip = SuiteResult::new("single-qubit round trip ‖ρ' − ρ‖_F", 1e-10);
    let mut norm = SuiteResult::new("Σw = 2", 1e-9);
    let mut physical = SuiteResult::new("physical tomograms accepted (rejections)", 0.0);
    let mut purity = SuiteResult::new("purity ≥ 1/2 (deficit)", 1e-12);
    let mut counter = SuiteResult::new("indefinite counterexample rejected", 0.0);
    let mut tensor = SuiteResult::new("tensor identities", TENSOR_TOL);
    let mut multi = SuiteResult::new("multi-qubit round trip ‖ρ' − ρ‖_F", 1e-9);
    let mut multi_norm = SuiteResult::new("Σw = 2^N", 1e-9);
    let mut files = SuiteResult::new("scheme JSON round trip (mismatches)", 0.0);
    let mut shots = SuiteResult::new("finite-shot error shrinks with shots", 0.0);

    for i in 0..iterations {
        for (m, &mode) in MODES.iter().enumerate() {
            let case_seed = derive_seed(seed, (i * MODES.len() + m) as u64);
            let s = match random_scheme(case_seed, mode) {
                Ok(s) => s,
                Err(e) => {
                    diag.fail(format!("seed {case_seed}: {e}"));
                    continue;
                }
            };
            closure.record(closure_sum(s.quadruple().vectors()).norm());

            let d = scheme_diagnostics(&s);
            let failed: Vec<_> = d.checks(&tols).into_iter().filter(|c| !c.passed).collect();
            diag.record(failed.len() as f64);
            if let Some(c) = failed.first() {
                diag.detail
                    .get_or_insert(format!("seed {case_seed}: {} = {:e} (bound {:e})", c.name, c.value, c.bound));
            }

            let rho = states::random_state(&mut rng, 2);
            purity.record(0.5 - tomography::purity(&rho));
            match tomography::forward(&rho, &s) {
                Ok(w) => {
                    norm.record((w.sum() - 2.0).abs());
                    let back = tomography::inverse(&w, &s).expect("matching length");
                    round_trip.record(back.frobenius_distance(rho.matrix()).expect("2x2"));
                    let r = tomography::is_physical(&w, &s, tols.psd).expect("matching length");
                    physical.record(if r.passed() { 0.0 } else { 1.0 });
                }
                Err(e) => round_trip.fail(e.to_string()),
            }

            let text = io::to_json_string(&SchemeFile::from_scheme(&s));
            let same = io::from_json_str::<SchemeFile>(&text, FileKind::Scheme)
                .and_then(|f| f.to_scheme())
                .map(|back| back == s)
                .unwrap_or(false);
            files.record(if same { 0.0 } else { 1.0 });
        }

        let angle = rng.random_range(0.15..0.85) * std::f64::consts::PI;
        let diagonal = if rng.random_bool(0.5) { FoldDiagonal::V0V2 } else { FoldDiagonal::V1V3 };
        let fold_angle = rng.random_range(0.1..0.9) * std::f64::consts::PI;
        match PlanarQuadrilateral::unit_rhombus(angle, diagonal, &tols)
            .and_then(|q| fold_quadrilateral(&q, fold_angle, &tols))
        {
            Ok(q) => {
                fold.record(closure_sum(q.vectors()).norm());
                fold.record(q.lengths().iter().map(|l| (l - 1.0).abs()).fold(0.0, f64::max));
            }
            Err(e) => fold.fail(e.to_string()),
        }
    }

    let mut example1 = None;
    match (io::preset("example1"), io::preset("example2")) {
        (Ok(e1), Ok(e2)) => {
            let w = Tomogram::new(vec![1.0, 1.0, 0.0, 0.0], "example1");
            let r = tomography::is_physical(&w, &e1, tols.psd).expect("matching length");
            counter.record(if r.passed() { 1.0 } else { 0.0 });

            match TensorScheme::new(vec![e1.clone(), e2.clone()])
                .and_then(|ts| multiqubit::verify_tensor_identities(&ts, VerifyMode::Exhaustive))
            {
                Ok(r) => r.checks(TENSOR_TOL).iter().for_each(|c| tensor.record(c.value)),
                Err(e) => tensor.fail(e.to_string()),
            }
            example1 = Some(e1);
        }
        (Err(e), _) | (_, Err(e)) => counter.fail(e.to_string()),
    }

    let multi_cases = (iterations / 10).max(3);
    for i in 0..multi_cases {
        let n = 2 + i % 2;
        let factors: Result<Vec<_>, _> = (0..n)
            .map(|k| random_scheme(derive_seed(seed ^ 0x7e45, (i * 3 + k) as u64), MODES[(i + k) % 3]))
            .collect();
        let ts = match factors.map_err(|e| e.to_string()).and_then(|f| TensorScheme::new(f).map_err(|e| e.to_string())) {
            Ok(ts) => ts,
            Err(e) => {
                multi.fail(e);
                continue;
            }
        };
        let rho = if i % 3 == 0 { states::ghz_state(n) } else { states::random_state(&mut rng, 1 << n) };
        match multiqubit::forward_n(&rho, &ts).and_then(|w| {
            multi_norm.record((w.sum() - (1 << n) as f64).abs());
            multiqubit::inverse_n(&w, &ts)
        }) {
            Ok(back) => multi.record(back.frobenius_distance(rho.matrix()).expect("same dimension")),
            Err(e) => multi.fail(e.to_string()),
        }
        if n == 3 && i < 6 {
            let mode = VerifyMode::Sampled { samples: multiqubit::DEFAULT_SAMPLES, seed: derive_seed(seed, i as u64) };
            match multiqubit::verify_tensor_identities(&ts, mode) {
                Ok(r) => r.checks(TENSOR_TOL).iter().for_each(|c| tensor.record(c.value)),
                Err(e) => tensor.fail(e.to_string()),
            }
        }
    }

    if let Some(e1) = example1 {
        let rho = states::random_pure_state(&mut rng, 2);
        let median_at = |m: u64| {
            tomography::run_trials(&rho, &e1, m, seed, 40)
                .map(|t| tomography::median(&t.iter().map(|x| x.frobenius_error).collect::<Vec<_>>()))
        };
        match (median_at(1_000), median_at(100_000)) {
            (Ok(a), Ok(b)) => shots.record(if b < a { 0.0 } else { 1.0 }),
            (Err(e), _) | (_, Err(e)) => shots.fail(e.to_string()),
        }
    }

    SelftestReport {
        seed,
        iterations,
        suites: vec![
            closure, fold, diag, round_trip, norm, physical, purity, counter, tensor, multi, multi_norm, files, shots,
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_passes_and_is_reproducible() {
        let a = run(3, 5);
        assert!(a.passed(), "{:#?}", a.suites.iter().filter(|s| !s.passed()).collect::<Vec<_>>());
        assert_eq!(a, run(3, 5));
    }
}

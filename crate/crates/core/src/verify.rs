//! Invariant suites shared by the `verify` command and the acceptance harness.
//!
//! Every check compares two independent routes (a closed form against the
//! spectral oracle, a fast builder against a streamed one, a sector
//! construction against a full tensor-product one) and reports the worst
//! deviation it saw.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::dynamics::{
    amplitude_2fermion, evolve_amplitudes, evolve_oracle, localisation_floor, marked_max_dip, marked_p11,
    marked_reduced_series, min_return_prob_kfermion, propagator_1fermion, return_prob_1fermion,
    return_prob_kfermion, spread_prob_1fermion, support_profile, SpectralEvolver, TimeGrid,
};
use crate::error::Result;
use crate::fock::{fock_annihilation, fock_creation, FockBasis, OccupationState, SectorBasis, WaveVector};
use crate::hamiltonians::{
    build_class_hamiltonian, build_class_hamiltonian_streamed, build_hopping, build_marked, build_quartic2,
    build_ring, build_xxx_spin, pauli_xxx_full, quartic2_closed_form, restrict_to_sector,
};
use crate::limits::binomial;
use crate::operator::SectorOperator;
use crate::permgroup::{realize_permutation, CycleType, Permutation};
use crate::spectral::{
    analytic_spectrum, dense_eigen, eigenvectors_high, eigenvectors_low, family_rank, fock_mode_annihilation,
    fock_mode_creation, marked_reduced_matrix, max_cross_overlap, mode_bilinear, mode_creation, numeric_spectrum,
    DEGENERACY_TOL,
};

/// How a check's measured value is judged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
    /// Reported only; never fails.
    Info,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Check { name: name.into(), value, bound: Bound::AtMost(tol) }
    }

    pub fn at_least(name: impl Into<String>, value: f64, floor: f64) -> Self {
        Check { name: name.into(), value, bound: Bound::AtLeast(floor) }
    }

    pub fn info(name: impl Into<String>, value: f64) -> Self {
        Check { name: name.into(), value, bound: Bound::Info }
    }

    pub fn passed(&self) -> bool {
        match self.bound {
            Bound::AtMost(tol) => self.value <= tol,
            Bound::AtLeast(floor) => self.value >= floor,
            Bound::Info => true,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        match self.bound {
            Bound::AtMost(tol) => write!(f, "{status} {}: {:.3e} (<= {tol:e})", self.name, self.value),
            Bound::AtLeast(floor) => write!(f, "{status} {}: {:.3e} (>= {floor})", self.name, self.value),
            Bound::Info => write!(f, "INFO {}: {:.3e}", self.name, self.value),
        }
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(Check::passed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

impl Level {
    pub fn max_sites(self) -> usize {
        match self {
            Level::Quick => 5,
            Level::Full => 8,
        }
    }
}

impl std::str::FromStr for Level {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(Level::Quick),
            "full" => Ok(Level::Full),
            other => Err(crate::error::Error::Parse(format!("unknown verify level '{other}'"))),
        }
    }
}

fn sectors(ns: impl IntoIterator<Item = usize>) -> impl Iterator<Item = (usize, usize)> {
    ns.into_iter().flat_map(|n| (1..n).map(move |k| (n, k)))
}

fn ket(n: usize, k: usize, sites: &[usize]) -> Result<WaveVector<f64>> {
    WaveVector::basis_ket(Arc::new(SectorBasis::new(n, k)?), sites)
}

/// Largest deviation between the sorted numeric eigenvalues of the hopping
/// model and the two-level prediction, over `N ∈ ns` and every `1 ≤ k < N`.
/// A multiplicity mismatch reports infinity.
pub fn hopping_spectrum(ns: impl IntoIterator<Item = usize>) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (n, k) in sectors(ns) {
        let h = build_hopping::<f64>(n, k)?;
        let (values, _) = dense_eigen(&h)?;
        let expected = analytic_spectrum(n, k)?;
        let mut predicted: Vec<f64> =
            expected.levels.iter().flat_map(|l| std::iter::repeat_n(l.e, l.mult)).collect();
        predicted.sort_by(f64::total_cmp);
        let dev = values.iter().zip(&predicted).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let grouped = numeric_spectrum(&h, k)?;
        if grouped.levels.len() != 2 || grouped.levels.iter().zip(&expected.levels).any(|(a, b)| a.mult != b.mult) {
            return Ok(f64::INFINITY);
        }
        worst = worst.max(dev);
    }
    Ok(worst)
}

/// Entrywise gap between the 1-fermion closed-form propagator and the oracle.
pub fn propagator_vs_oracle(ns: impl IntoIterator<Item = usize>, times: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for n in ns {
        let evolver = SpectralEvolver::new(&build_hopping::<f64>(n, 1)?)?;
        for &t in times {
            let closed = propagator_1fermion::<f64>(n, t)?;
            worst = worst.max(closed.max_abs_diff(&evolver.propagator(t)));
        }
    }
    Ok(worst)
}

/// `count` uniform random times in `[0, t_max)`.
pub fn random_times(count: usize, t_max: f64, seed: u64) -> Vec<f64> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count).map(|_| rng.gen_range(0.0..t_max)).collect()
}

/// Probability laws of the hopping model against the oracle, one check per law.
pub fn probability_formulas(ns: impl IntoIterator<Item = usize>, grid: &TimeGrid, tol: f64) -> Result<Vec<Check>> {
    let times = grid.times();
    let mut ret1: f64 = 0.0;
    let mut spread1: f64 = 0.0;
    let mut retk: f64 = 0.0;
    let mut amp2: f64 = 0.0;
    let mut uniform: f64 = 0.0;
    for (n, k) in sectors(ns) {
        let basis = Arc::new(SectorBasis::new(n, k)?);
        let h = build_hopping::<f64>(n, k)?;
        let start_sites: Vec<usize> = (1..=k).collect();
        let start = OccupationState::from_sites(&start_sites, n)?;
        let psi0 = WaveVector::basis_ket(Arc::clone(&basis), &start_sites)?;
        let amps = evolve_amplitudes(&h, &psi0, grid)?;
        let c0 = basis.rank(&start).expect("start ket in sector");
        for (row, &t) in amps.iter().zip(&times) {
            let p0 = row[c0].norm_sqr();
            retk = retk.max((p0 - return_prob_kfermion::<f64>(n, k, t)).abs());
            let law = 2.0 * (1.0 - (n as f64 * t).cos()) / (n * n) as f64;
            for (c, target) in basis.iter().enumerate() {
                if c != c0 && target.overlap(&start) + 1 == k {
                    uniform = uniform.max((row[c].norm_sqr() - law).abs());
                }
            }
            if k == 1 {
                ret1 = ret1.max((p0 - return_prob_1fermion::<f64>(n, t)).abs());
                for (c, a) in row.iter().enumerate() {
                    if c != c0 {
                        spread1 = spread1.max((a.norm_sqr() - spread_prob_1fermion::<f64>(n, t)).abs());
                    }
                }
            }
        }
        if k == 2 {
            // every initial pair, not just (1,2)
            for (c_init, init) in basis.iter().enumerate() {
                let s = init.sites();
                let from = WaveVector::basis_ket(Arc::clone(&basis), &s)?;
                let series = if c_init == c0 { amps.clone() } else { evolve_amplitudes(&h, &from, grid)? };
                for (row, &t) in series.iter().zip(&times) {
                    for (c, target) in basis.iter().enumerate() {
                        let ts = target.sites();
                        let closed = amplitude_2fermion::<f64>((s[0], s[1]), (ts[0], ts[1]), n, t)?;
                        amp2 = amp2.max((closed - row[c]).norm());
                    }
                }
            }
        }
    }
    Ok(vec![
        Check::at_most("return_prob_1fermion vs oracle", ret1, tol),
        Check::at_most("spread_prob_1fermion vs oracle", spread1, tol),
        Check::at_most("return_prob_kfermion vs oracle", retk, tol),
        Check::at_most("amplitude_2fermion vs oracle", amp2, tol),
        Check::at_most("one-site-shared targets follow 2(1-cos Nt)/N^2", uniform, tol),
    ])
}

/// Largest gap between the golden-section minimum of the return probability
/// and `((N - 2k)/N)²`.
pub fn localisation_floor_gap(cases: impl IntoIterator<Item = (usize, usize)>) -> f64 {
    cases
        .into_iter()
        .map(|(n, k)| (min_return_prob_kfermion(n, k).1 - localisation_floor::<f64>(n, k)).abs())
        .fold(0.0, f64::max)
}

/// Leak of the symmetric and ring models from the same start.
pub fn restricted_support(initial: &OccupationState, grid: &TimeGrid) -> Result<(f64, f64)> {
    let (n, k) = (initial.n_sites(), initial.n_particles());
    let symmetric = support_profile(&build_hopping::<f64>(n, k)?, initial, grid)?;
    let ring = support_profile(&build_ring::<f64>(n, k)?, initial, grid)?;
    Ok((symmetric.leak, ring.leak))
}

/// Largest sine of a principal angle between an eigenspace of `perturbed` and
/// the eigenspace of `base` it should lie in.
pub fn eigenspace_misalignment(base: &SectorOperator<f64>, perturbed: &SectorOperator<f64>) -> Result<f64> {
    let projectors = eigenspace_projectors(base)?;
    let (values, vectors) = dense_eigen(perturbed)?;
    let mut worst: f64 = 0.0;
    let mut start = 0;
    while start < values.len() {
        let mut end = start + 1;
        while end < values.len() && (values[end] - values[start]).abs() <= DEGENERACY_TOL {
            end += 1;
        }
        let q = vectors.columns(start, end - start).into_owned();
        // the best-matching base eigenspace leaves the smallest remainder
        let best = projectors
            .iter()
            .map(|p| (&q - p * &q).norm())
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(best);
        start = end;
    }
    Ok(worst)
}

fn eigenspace_projectors(op: &SectorOperator<f64>) -> Result<Vec<DMatrix<f64>>> {
    let (values, vectors) = dense_eigen(op)?;
    let mut out = Vec::new();
    let mut start = 0;
    while start < values.len() {
        let mut end = start + 1;
        while end < values.len() && (values[end] - values[start]).abs() <= DEGENERACY_TOL {
            end += 1;
        }
        let q = vectors.columns(start, end - start).into_owned();
        out.push(&q * q.transpose());
        start = end;
    }
    Ok(out)
}

/// Quartic operator against its closed form, commutation with the hopping
/// model, and eigenspace stability under `H + λ H₂`.
pub fn quartic_identity(ns: impl IntoIterator<Item = usize>, lambdas: &[f64]) -> Result<Vec<Check>> {
    let mut closed: f64 = 0.0;
    let mut printed_main: f64 = 0.0;
    let mut printed_appendix: f64 = 0.0;
    let mut commutator: f64 = 0.0;
    let mut angles: f64 = 0.0;
    for n in ns {
        for k in 0..=n {
            let direct = build_quartic2::<i64>(n, k)?;
            closed = closed.max(direct.max_abs_diff(&quartic2_closed_form::<i64>(n, k)?));
            let hop = build_hopping::<i64>(n, k)?;
            let dim = hop.rows();
            let pairs = (k * k.saturating_sub(1)) as i64;
            let c = binomial(n.saturating_sub(2), 2) as i64 - 1;
            let two_h = hop.scale(2 * (k as i64 - 1));
            // (C(N-2,2)-1)(N̂²-N̂) + 2H(N̂-1), and the same with a ½ on the first term
            let main = &two_h + &SectorOperator::identity(dim).scale(c * pairs);
            let appendix = &two_h + &SectorOperator::identity(dim).scale(c * pairs / 2);
            printed_main = printed_main.max(direct.max_abs_diff(&main));
            printed_appendix = printed_appendix.max(direct.max_abs_diff(&appendix));
            if (1..n).contains(&k) {
                let hf = hop.map(|&v| v as f64);
                let qf = direct.map(|&v| v as f64);
                commutator = commutator.max(hf.commutator(&qf).max_abs());
                for &lambda in lambdas {
                    let perturbed = &hf + &qf.scale(lambda);
                    angles = angles.max(eigenspace_misalignment(&hf, &perturbed)?);
                }
            }
        }
    }
    Ok(vec![
        Check::at_most("quartic direct sum = ½(C(N-2,2)-1)(N^2-N) + H(N-1)", closed, 1e-10),
        Check::at_most("[H, H2]", commutator, 1e-12),
        Check::at_most("eigenspaces of H + λ·H2 vs H (sin of principal angle)", angles, 1e-10),
        Check::info("printed form (C(N-2,2)-1)(N^2-N) + 2H(N-1), residual", printed_main),
        Check::info("printed form ½(C(N-2,2)-1)(N^2-N) + 2H(N-1), residual", printed_appendix),
    ])
}

/// `samples` uniformly random permutations of `n` sites.
pub fn random_permutations(n: usize, samples: usize, rng: &mut StdRng) -> Vec<Permutation> {
    (0..samples)
        .map(|_| {
            let mut images: Vec<usize> = (1..=n).collect();
            images.shuffle(rng);
            Permutation::from_one_line(&images).expect("shuffle of 1..=n")
        })
        .collect()
}

/// `[H, R(σ)]` for random σ, and exact Coxeter relations and homomorphism of the
/// realized adjacent transpositions.
pub fn symmetry_invariance(ns: impl IntoIterator<Item = usize>, samples: usize, seed: u64) -> Result<Vec<Check>> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut commutator: f64 = 0.0;
    let mut relations: f64 = 0.0;
    let mut homomorphism: f64 = 0.0;
    let mut marked: f64 = 0.0;
    for n in ns {
        let sigmas = random_permutations(n, samples, &mut rng);
        for k in 0..=n {
            let h = build_hopping::<f64>(n, k)?;
            let hm = build_marked::<f64>(n, k, 0.37)?;
            for (idx, sigma) in sigmas.iter().enumerate() {
                let r = realize_permutation::<f64>(sigma, k)?;
                commutator = commutator.max(h.commutator(&r).max_abs());
                let tau = &sigmas[(idx + 1) % sigmas.len()];
                let lhs = realize_permutation::<i64>(sigma, k)?.matmul(&realize_permutation::<i64>(tau, k)?);
                let rhs = realize_permutation::<i64>(&sigma.compose(tau)?, k)?;
                homomorphism = homomorphism.max(lhs.max_abs_diff(&rhs));
                if sigma.fixes(1) {
                    marked = marked.max(hm.commutator(&r).max_abs());
                }
            }
            relations = relations.max(coxeter_residual(n, k)?);
        }
    }
    Ok(vec![
        Check::at_most("[H, R(σ)] over random σ", commutator, 1e-12),
        Check::at_most("R(σ)R(τ) = R(στ), exact", homomorphism, 0.0),
        Check::at_most("Coxeter relations of realized s_i, exact", relations, 0.0),
        Check::at_most("[H_marked, R(σ)] for σ fixing site 1", marked, 1e-12),
    ])
}

/// Worst entry of `s_i² - 1`, `(s_i s_{i+1})³ - 1` and `(s_i s_j)² - 1`
/// (`|i - j| ≥ 2`) over realized adjacent transpositions, exact arithmetic.
pub fn coxeter_residual(n: usize, k: usize) -> Result<f64> {
    if n < 2 {
        return Ok(0.0);
    }
    let s: Vec<SectorOperator<i64>> = (1..n)
        .map(|i| realize_permutation::<i64>(&Permutation::transposition(i, i + 1, n)?, k))
        .collect::<Result<_>>()?;
    let id = SectorOperator::<i64>::identity(s[0].rows());
    let mut worst: f64 = 0.0;
    for i in 0..s.len() {
        worst = worst.max(s[i].matmul(&s[i]).max_abs_diff(&id));
        if i + 1 < s.len() {
            let p = s[i].matmul(&s[i + 1]);
            worst = worst.max(p.matmul(&p).matmul(&p).max_abs_diff(&id));
        }
        for j in i + 2..s.len() {
            let p = s[i].matmul(&s[j]);
            worst = worst.max(p.matmul(&p).max_abs_diff(&id));
        }
    }
    Ok(worst)
}

/// Marked-model closed form against the 3×3 reduction and the full sector.
pub fn marked_model(ns: impl IntoIterator<Item = usize>, betas: &[f64], grid: &TimeGrid) -> Result<Vec<Check>> {
    let times = grid.times();
    let mut reduced: f64 = 0.0;
    let mut full: f64 = 0.0;
    let mut symmetric_limit: f64 = 0.0;
    for n in ns {
        for &beta in betas {
            let red = marked_reduced_series::<f64>(n, beta, 0, grid)?;
            let oracle = evolve_oracle(&build_marked::<f64>(n, 1, beta)?, &ket(n, 1, &[1])?, grid)?;
            for (i, &t) in times.iter().enumerate() {
                let closed = marked_p11::<f64>(n, beta, t)?;
                reduced = reduced.max((closed - red[i]).abs());
                full = full.max((closed - oracle.rows[i][0]).abs());
            }
        }
        for &t in &times {
            symmetric_limit = symmetric_limit.max((marked_p11::<f64>(n, 1.0, t)? - return_prob_1fermion::<f64>(n, t)).abs());
        }
    }
    Ok(vec![
        Check::at_most("marked_p11 vs 3x3 reduction", reduced, 1e-10),
        Check::at_most("marked_p11 vs full-sector oracle", full, 1e-10),
        Check::at_most("marked_p11(β=1) vs return_prob_1fermion", symmetric_limit, 1e-12),
    ])
}

/// Deepest dip of `|⟨1|1(t)⟩|²` seen by the full-sector oracle, with the
/// closed-form bound.
pub fn marked_dip(n: usize, beta: f64, grid: &TimeGrid) -> Result<(f64, f64)> {
    let oracle = evolve_oracle(&build_marked::<f64>(n, 1, beta)?, &ket(n, 1, &[1])?, grid)?;
    let seen = oracle.rows.iter().map(|r| 1.0 - r[0]).fold(0.0, f64::max);
    Ok((seen, marked_max_dip::<f64>(n, beta)?))
}

/// Eigenvalues of the 3×3 reduction against the full 1-fermion marked spectrum.
pub fn marked_reduction_spectrum(n: usize, beta: f64) -> Result<f64> {
    let reduced = marked_reduced_matrix(n, beta)?.symmetric_eigen().eigenvalues;
    let (full, _) = dense_eigen(&build_marked::<f64>(n, 1, beta)?)?;
    Ok(reduced
        .iter()
        .map(|e| full.iter().map(|f| (e - f).abs()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max))
}

/// One-down XXX sector against `((N-1)(N-2)/2 - 1)δ + 1`, exact, and every
/// sector against the Pauli tensor construction.
pub fn spin_sector(ns: impl IntoIterator<Item = usize>, pauli_max: usize) -> Result<Vec<Check>> {
    let mut formula: f64 = 0.0;
    let mut pauli: f64 = 0.0;
    for n in ns {
        let h = build_xxx_spin::<i64>(n, 1)?;
        let diag = ((n - 1) * (n - 2) / 2) as i64 - 1;
        let expect = SectorOperator::from_fn(n, n, |i, j| if i == j { diag + 1 } else { 1 });
        formula = formula.max(h.max_abs_diff(&expect));
        if n <= pauli_max {
            let full = pauli_xxx_full::<f64>(n)?;
            for down in 0..=n {
                let restricted = restrict_to_sector(&full, n, down)?;
                let built = build_xxx_spin::<f64>(n, down)?.map(|&v| Complex::new(v, 0.0));
                pauli = pauli.max(restricted.max_abs_diff(&built));
            }
        }
    }
    Ok(vec![
        Check::at_most("xxx one-down sector vs ((N-1)(N-2)/2 - 1)δ + 1, exact", formula, 0.0),
        Check::at_most("xxx sectors vs Pauli tensor construction", pauli, 1e-12),
    ])
}

/// Residuals, cross-level overlaps and combined rank of the explicit families.
pub fn eigen_families(ns: impl IntoIterator<Item = usize>) -> Result<Vec<Check>> {
    let mut residual: f64 = 0.0;
    let mut cross: f64 = 0.0;
    let mut rank_gap: f64 = 0.0;
    let mut norm: f64 = 0.0;
    for (n, k) in sectors(ns) {
        let h = build_hopping::<f64>(n, k)?;
        let high = eigenvectors_high::<f64>(n, k)?;
        let low = eigenvectors_low::<f64>(n, k)?;
        for v in &high {
            residual = residual.max(v.eigen_residual(&h, (n - k) as f64));
            norm = norm.max((v.norm() - 1.0).abs());
        }
        for v in &low {
            residual = residual.max(v.eigen_residual(&h, -(k as f64)));
            norm = norm.max((v.norm() - 1.0).abs());
        }
        cross = cross.max(max_cross_overlap(&high, &low));
        let all: Vec<_> = high.iter().chain(&low).cloned().collect();
        let rank = family_rank(&all, 1e-10);
        rank_gap = rank_gap.max((rank as f64 - binomial(n, k) as f64).abs());
    }
    Ok(vec![
        Check::at_most("eigen-residual of high/low families", residual, 1e-12),
        Check::at_most("unit norm of family vectors", norm, 1e-13),
        Check::at_most("cross-level inner products", cross, 1e-13),
        Check::at_most("combined rank minus C(N,k)", rank_gap, 0.0),
    ])
}

/// `{a_j, a†_l} = δ_jl`, `{a_j, a_l} = 0` on the full Fock space.
pub fn car_relations(n: usize) -> Result<f64> {
    let fock = FockBasis::new(n)?;
    let a: Vec<SectorOperator<i64>> = (1..=n).map(|j| fock_annihilation(&fock, j)).collect::<Result<_>>()?;
    let ad: Vec<SectorOperator<i64>> = (1..=n).map(|j| fock_creation(&fock, j)).collect::<Result<_>>()?;
    let id = SectorOperator::<i64>::identity(fock.dim());
    let zero = SectorOperator::<i64>::zeros(fock.dim(), fock.dim());
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for l in 0..n {
            let expect = if j == l { &id } else { &zero };
            worst = worst.max(a[j].anticommutator(&ad[l]).max_abs_diff(expect));
            worst = worst.max(a[j].anticommutator(&a[l]).max_abs());
        }
    }
    Ok(worst)
}

/// `{A_α, A†_β} = δ_αβ` for the Fourier modes on the full Fock space.
pub fn mode_car_relations(n: usize) -> Result<f64> {
    let fock = FockBasis::new(n)?;
    let id = SectorOperator::<Complex<f64>>::identity(fock.dim());
    let mut worst: f64 = 0.0;
    for alpha in 1..=n {
        let a = fock_mode_annihilation::<f64>(alpha, &fock)?;
        for beta in 1..=n {
            let ad = fock_mode_creation::<f64>(beta, &fock)?;
            let ac = a.anticommutator(&ad);
            worst = worst.max(if alpha == beta { ac.max_abs_diff(&id) } else { ac.max_abs() });
        }
    }
    Ok(worst)
}

/// `H = N A†_N A_N - N̂` on every sector, and `[H, A†_α A_β] = 0` for `α, β ≠ N`.
pub fn mode_identities(n: usize) -> Result<(f64, f64)> {
    let mut identity: f64 = 0.0;
    let mut commutant: f64 = 0.0;
    for k in 1..=n {
        let basis = SectorBasis::new(n, k)?;
        let h = build_hopping::<f64>(n, k)?.map(|&v| Complex::new(v, 0.0));
        let nn = mode_bilinear::<f64>(n, n, &basis)?.scale(Complex::new(n as f64, 0.0));
        let number = SectorOperator::identity(basis.dim()).scale(Complex::new(k as f64, 0.0));
        identity = identity.max(h.max_abs_diff(&(&nn - &number)));
        for alpha in 1..n {
            for beta in 1..n {
                commutant = commutant.max(h.commutator(&mode_bilinear::<f64>(alpha, beta, &basis)?).max_abs());
            }
        }
    }
    // the creator side is checked separately so a bad adjoint cannot hide
    let lower = SectorBasis::new(n, 0)?;
    let created = mode_creation::<f64>(n, &lower)?;
    let uniform = 1.0 / (n as f64).sqrt();
    let spread = (0..n).map(|r| (created.get(r, 0) - Complex::new(uniform, 0.0)).norm()).fold(0.0, f64::max);
    Ok((identity.max(spread), commutant))
}

/// Fast transposition-class builder against the streamed class sum.
pub fn class_sum_paths(ns: impl IntoIterator<Item = usize>) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for n in ns {
        let ct = CycleType::p_cycle(2, n)?;
        for k in 0..=n {
            let fast = build_class_hamiltonian::<i64>(&ct, k)?;
            worst = worst.max(fast.max_abs_diff(&build_class_hamiltonian_streamed::<i64>(&ct, k)?));
        }
    }
    Ok(worst)
}

/// Runs every suite with sizes capped by `level`.
pub fn run_suite(level: Level) -> Result<Vec<Check>> {
    let cap = level.max_sites();
    let grid = TimeGrid::new(0.0, 10.0, 100)?;
    let mut out = vec![
        Check::at_most("fermion CAR on full Fock space", car_relations(cap.min(5))?, 0.0),
        Check::at_most("class sum fast path vs streamed", class_sum_paths(2..=cap.min(6))?, 0.0),
        Check::at_most("hopping spectrum vs two-level prediction", hopping_spectrum(2..=cap)?, 1e-9),
    ];
    out.push(Check::at_most("mode CAR", mode_car_relations(cap.min(5))?, 1e-13));
    let (identity, commutant) = mode_identities(cap.min(5))?;
    out.push(Check::at_most("H = N A†_N A_N - N", identity, 1e-12));
    out.push(Check::at_most("[H, A†_α A_β], α,β ≠ N", commutant, 1e-12));
    out.extend(eigen_families(2..=cap.min(7))?);
    out.push(Check::at_most(
        "propagator_1fermion vs oracle",
        propagator_vs_oracle(2..=cap, &random_times(20, 20.0, 7))?,
        1e-11,
    ));
    out.extend(probability_formulas(2..=cap, &grid, 1e-10)?);
    let floor_cases: Vec<(usize, usize)> = sectors(2..=cap).chain([(100, 1)]).collect();
    out.push(Check::at_most("golden-section minimum vs ((N-2k)/N)^2", localisation_floor_gap(floor_cases), 1e-12));
    let n = cap.max(5);
    let start = OccupationState::from_sites(&[n / 2, n / 2 + 1], n)?;
    let (sym, ring) = restricted_support(&start, &TimeGrid::new(0.0, 20.0, 200)?)?;
    out.push(Check::at_most(format!("leak, symmetric model, N={n}, k=2"), sym, 1e-10));
    out.push(Check::info(format!("leak, ring model, N={n}, k=2"), ring));
    out.extend(quartic_identity(4..=cap.min(6), &[0.5, 1.0, 2.0])?);
    out.extend(symmetry_invariance(2..=cap.min(7), 10, 11)?);
    out.extend(marked_model(3..=cap, &[0.0, 0.05, 0.3, 1.0], &grid)?);
    out.extend(spin_sector(3..=cap, 4)?);
    Ok(out)
}

//! Time evolution: a spectral-decomposition evolver for arbitrary real
//! symmetric Hamiltonians, closed-form propagators and probability laws for
//! the all-to-all hopping model, support/leak analysis, and the marked-site
//! model.

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::{DMatrix, Vector3};
use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{apply_annihilation, apply_creation, OccupationState, SectorBasis, WaveVector};
use crate::operator::SectorOperator;
use crate::scalar::{cis, Real};
use crate::spectral::{dense_eigen, marked_reduced_matrix, root_of_unity};

/// Uniform grid of `n_points` times from `t_start` to `t_end` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub n_points: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, n_points: usize) -> Result<Self> {
        let grid = TimeGrid { t_start, t_end, n_points };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_points < 2 {
            return Err(Error::InvalidArgument(format!("time grid needs at least 2 points, got {}", self.n_points)));
        }
        if !(self.t_start.is_finite() && self.t_end.is_finite() && self.t_end > self.t_start) {
            return Err(Error::InvalidArgument(format!(
                "time grid needs finite t_start < t_end, got {}..{}",
                self.t_start, self.t_end
            )));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.t_end - self.t_start) / (self.n_points - 1) as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.t_end
        } else {
            self.t_start + i as f64 * self.step()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.time(i)).collect()
    }
}

impl Default for TimeGrid {
    fn default() -> Self {
        TimeGrid { t_start: 0.0, t_end: 20.0, n_points: 400 }
    }
}

/// Probability series over a time grid; one column per labelled state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkResult {
    pub grid: TimeGrid,
    pub labels: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl WalkResult {
    pub fn times(&self) -> Vec<f64> {
        self.grid.times()
    }

    /// Keeps only the given columns, in the given order.
    pub fn select(&self, columns: &[usize]) -> WalkResult {
        WalkResult {
            grid: self.grid,
            labels: columns.iter().map(|&c| self.labels[c].clone()).collect(),
            rows: self.rows.iter().map(|r| columns.iter().map(|&c| r[c]).collect()).collect(),
        }
    }

    pub fn column(&self, label: &str) -> Option<Vec<f64>> {
        let c = self.labels.iter().position(|l| l == label)?;
        Some(self.rows.iter().map(|r| r[c]).collect())
    }

    /// Largest deviation of a row sum from one.
    pub fn max_norm_error(&self) -> f64 {
        self.rows.iter().map(|r| (r.iter().sum::<f64>() - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &WalkResult) -> f64 {
        self.rows
            .iter()
            .zip(&other.rows)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    /// CSV with header `t,<labels>` and values to 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (t, row) in self.times().into_iter().zip(&self.rows) {
            write!(out, "{t:.11e}").unwrap();
            for v in row {
                write!(out, ",{v:.11e}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Parses [`to_csv`](Self::to_csv) output. Lines starting with `#` are skipped.
    pub fn from_csv(text: &str) -> Result<WalkResult> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))?;
        let mut cols = header.split(',');
        if cols.next() != Some("t") {
            return Err(Error::Parse("CSV header must start with 't'".into()));
        }
        let labels: Vec<String> = cols.map(str::to_string).collect();
        let mut times = Vec::new();
        let mut rows = Vec::new();
        for (n, line) in lines.enumerate() {
            let values: Vec<f64> = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("row {}: {e}", n + 1)))?;
            if values.len() != labels.len() + 1 {
                return Err(Error::Parse(format!(
                    "row {} has {} fields, expected {}",
                    n + 1,
                    values.len(),
                    labels.len() + 1
                )));
            }
            times.push(values[0]);
            rows.push(values[1..].to_vec());
        }
        if times.len() < 2 {
            return Err(Error::Parse("CSV needs at least two time rows".into()));
        }
        let grid = TimeGrid::new(times[0], *times.last().unwrap(), times.len())?;
        Ok(WalkResult { grid, labels, rows })
    }
}

/// `e^{-iHt}` through the eigendecomposition of a real symmetric `H`.
#[derive(Debug, Clone)]
pub struct SpectralEvolver<R: Real> {
    values: Vec<R>,
    vectors: DMatrix<R>,
}

impl<R: Real> SpectralEvolver<R> {
    pub fn new(h: &SectorOperator<R>) -> Result<Self> {
        let (values, vectors) = dense_eigen(h)?;
        Ok(SpectralEvolver { values, vectors })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn eigenvalues(&self) -> &[R] {
        &self.values
    }

    pub fn evolve(&self, psi0: &[Complex<R>], t: R) -> Vec<Complex<R>> {
        let d = self.dim();
        let coeffs: Vec<Complex<R>> = (0..d)
            .map(|m| {
                let c = (0..d).fold(Complex::zero(), |acc: Complex<R>, a| acc + psi0[a] * self.vectors[(a, m)]);
                c * cis(-self.values[m] * t)
            })
            .collect();
        (0..d)
            .map(|a| (0..d).fold(Complex::zero(), |acc: Complex<R>, m| acc + coeffs[m] * self.vectors[(a, m)]))
            .collect()
    }

    pub fn propagator(&self, t: R) -> SectorOperator<Complex<R>> {
        let d = self.dim();
        let phases: Vec<Complex<R>> = self.values.iter().map(|&e| cis(-e * t)).collect();
        SectorOperator::from_fn(d, d, |a, b| {
            (0..d).fold(Complex::zero(), |acc, m| acc + phases[m] * (self.vectors[(a, m)] * self.vectors[(b, m)]))
        })
    }
}

fn check_state_dim<R: Real>(h: &SectorOperator<R>, psi0: &WaveVector<R>) -> Result<()> {
    if h.rows() != psi0.amps().len() || h.cols() != psi0.amps().len() {
        return Err(Error::SizeMismatch { expected: psi0.amps().len(), found: h.rows() });
    }
    Ok(())
}

/// Amplitude series `ψ(t)` on every grid point, in grid order.
pub fn evolve_amplitudes<R: Real>(
    h: &SectorOperator<R>,
    psi0: &WaveVector<R>,
    grid: &TimeGrid,
) -> Result<Vec<Vec<Complex<R>>>> {
    check_state_dim(h, psi0)?;
    grid.validate()?;
    let evolver = SpectralEvolver::new(h)?;
    Ok(grid.times().par_iter().map(|&t| evolver.evolve(psi0.amps(), R::lit(t))).collect())
}

/// Brute-force evolution of `ψ0` under `H`, reported as probabilities over the
/// whole sector basis.
pub fn evolve_oracle<R: Real>(h: &SectorOperator<R>, psi0: &WaveVector<R>, grid: &TimeGrid) -> Result<WalkResult> {
    let amps = evolve_amplitudes(h, psi0, grid)?;
    Ok(WalkResult {
        grid: *grid,
        labels: psi0.basis().labels(),
        rows: amps.into_iter().map(|row| row.iter().map(|a| a.norm_sqr().as_f64()).collect()).collect(),
    })
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 sites, got {n}")));
    }
    Ok(())
}

/// `e^{-iHt}` of the 1-fermion hopping model:
/// `e^{it}[(𝕀 - J/N) + (J/N) e^{-iNt}]`, `J` the all-ones matrix.
pub fn propagator_1fermion<R: Real>(n: usize, t: R) -> Result<SectorOperator<Complex<R>>> {
    check_n(n)?;
    let nn = R::from_int(n as i64);
    let global = cis(t);
    let off = (cis(-nn * t) - Complex::new(R::one(), R::zero())) / nn;
    let diag = Complex::new(R::one(), R::zero()) + off;
    Ok(SectorOperator::from_fn(n, n, |a, b| global * if a == b { diag } else { off }))
}

/// `|⟨j|j(t)⟩|² = (1 + (N-1)² + 2(N-1) cos Nt) / N²`.
pub fn return_prob_1fermion<R: Real>(n: usize, t: R) -> R {
    return_prob_kfermion(n, 1, t)
}

/// `|⟨i|j(t)⟩|² = 2(1 - cos Nt) / N²` for `i ≠ j`.
pub fn spread_prob_1fermion<R: Real>(n: usize, t: R) -> R {
    let nn = R::from_int(n as i64);
    R::from_int(2) * (R::one() - (nn * t).cos()) / (nn * nn)
}

/// `(k² + (N-k)² + 2k(N-k) cos Nt) / N²`.
pub fn return_prob_kfermion<R: Real>(n: usize, k: usize, t: R) -> R {
    let nn = R::from_int(n as i64);
    let kk = R::from_int(k as i64);
    let rest = nn - kk;
    let two = R::from_int(2);
    (kk * kk + rest * rest + two * kk * rest * (nn * t).cos()) / (nn * nn)
}

/// `((N - 2k)/N)²`, the smallest value the return probability reaches.
pub fn localisation_floor<R: Real>(n: usize, k: usize) -> R {
    let x = R::from_int(n as i64 - 2 * k as i64) / R::from_int(n as i64);
    x * x
}

/// Golden-section minimum of `f` on `[a, b]`; `f` must be unimodal there.
pub fn golden_section_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let t = 0.5 * (a + b);
    (t, f(t))
}

/// Numerical minimum of [`return_prob_kfermion`] over one period `2π/N`.
pub fn min_return_prob_kfermion(n: usize, k: usize) -> (f64, f64) {
    let period = std::f64::consts::TAU / n as f64;
    golden_section_min(|t| return_prob_kfermion::<f64>(n, k, t), 0.0, period, 1e-10)
}

fn check_pair(a: usize, b: usize, n: usize) -> Result<()> {
    for s in [a, b] {
        if s == 0 || s > n {
            return Err(Error::SiteOutOfRange { site: s, n_sites: n });
        }
    }
    if a == b {
        return Err(Error::InvalidArgument(format!("pair ({a},{b}) repeats a site")));
    }
    Ok(())
}

/// `⟨k,l| e^{-iHt} |i,j⟩` for the 2-fermion hopping model from the mode
/// expansion, with `|i,j⟩ = a†_i a†_j |Ω⟩`.
pub fn amplitude_2fermion<R: Real>(
    (i, j): (usize, usize),
    (k, l): (usize, usize),
    n: usize,
    t: R,
) -> Result<Complex<R>> {
    check_n(n)?;
    check_pair(i, j, n)?;
    check_pair(k, l, n)?;
    let w = |p: usize, alpha: usize, sign: i64| root_of_unity::<R>(sign * (p * alpha) as i64, n);
    let mut high = Complex::zero();
    for a in 1..n {
        high += (w(i, a, 1) - w(j, a, 1)) * (w(k, a, -1) - w(l, a, -1));
    }
    let mut low = Complex::zero();
    for a in 1..n {
        for b in a + 1..n {
            let ket = root_of_unity::<R>((i * a + j * b) as i64, n) - root_of_unity::<R>((i * b + j * a) as i64, n);
            let bra =
                root_of_unity::<R>(-((k * a + l * b) as i64), n) - root_of_unity::<R>(-((l * a + k * b) as i64), n);
            low += ket * bra;
        }
    }
    let nn = R::from_int(n as i64);
    let two = R::from_int(2);
    Ok((cis(-(nn - two) * t) * high + cis(two * t) * low) / (nn * nn))
}

/// `⟨T| a†_b a_a |S⟩` if `T` is `S` with one fermion moved, else `None`.
fn hop_sign(from: &OccupationState, to: &OccupationState) -> Option<i8> {
    let removed = from.bits() & !to.bits();
    let added = to.bits() & !from.bits();
    if removed.count_ones() != 1 || added.count_ones() != 1 {
        return None;
    }
    let a = removed.trailing_zeros() as usize + 1;
    let b = added.trailing_zeros() as usize + 1;
    let (s1, mid) = apply_annihilation(*from, a).ok()??;
    let (s2, _) = apply_creation(mid, b).ok()??;
    Some(s1 * s2)
}

/// `⟨T| e^{-iHt} |S⟩` for the hopping model in any sector, from
/// `e^{-iHt} = e^{ikt}[𝕀 + (e^{-iNt} - 1)(H + k)/N]`.
pub fn amplitude_kfermion<R: Real>(initial: &OccupationState, target: &OccupationState, t: R) -> Result<Complex<R>> {
    let n = initial.n_sites();
    check_n(n)?;
    let k = initial.n_particles();
    if target.n_sites() != n || target.n_particles() != k {
        return Err(Error::InvalidArgument("initial and target states are in different sectors".into()));
    }
    let nn = R::from_int(n as i64);
    let global = cis(R::from_int(k as i64) * t);
    let kick = (cis(-nn * t) - Complex::new(R::one(), R::zero())) / nn;
    let value = if initial == target {
        Complex::new(R::one(), R::zero()) + kick * R::from_int(k as i64)
    } else {
        match hop_sign(initial, target) {
            Some(s) => kick * R::from_int(s as i64),
            None => Complex::zero(),
        }
    };
    Ok(global * value)
}

/// Closed-form probabilities of the hopping model from `initial` over the
/// given targets.
pub fn closed_form_walk(initial: &OccupationState, targets: &[OccupationState], grid: &TimeGrid) -> Result<WalkResult> {
    grid.validate()?;
    let rows = grid
        .times()
        .par_iter()
        .map(|&t| targets.iter().map(|tg| amplitude_kfermion::<f64>(initial, tg, t).map(|a| a.norm_sqr())).collect())
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(WalkResult { grid: *grid, labels: targets.iter().map(OccupationState::label).collect(), rows })
}

/// Probability profile of a walk from a basis ket plus the leak onto kets
/// sharing fewer than `k - 1` sites with the start.
#[derive(Debug, Clone)]
pub struct SupportProfile {
    pub result: WalkResult,
    /// Column mask of targets sharing at least `k - 1` sites with the start.
    pub allowed: Vec<bool>,
    /// Largest forbidden-target probability at each time.
    pub leak_series: Vec<f64>,
    pub leak: f64,
}

impl SupportProfile {
    /// Total probability on allowed targets at each time.
    pub fn allowed_mass(&self) -> Vec<f64> {
        self.result
            .rows
            .iter()
            .map(|r| r.iter().zip(&self.allowed).filter(|(_, &a)| a).map(|(p, _)| p).sum())
            .collect()
    }
}

/// Indices of basis kets sharing at least `k - 1` sites with `initial`.
pub fn shared_support(basis: &SectorBasis, initial: &OccupationState) -> Vec<usize> {
    let need = initial.n_particles().saturating_sub(1);
    basis.iter().enumerate().filter(|(_, s)| s.overlap(initial) >= need).map(|(i, _)| i).collect()
}

pub fn support_profile<R: Real>(h: &SectorOperator<R>, initial: &OccupationState, grid: &TimeGrid) -> Result<SupportProfile> {
    let basis = Arc::new(SectorBasis::new(initial.n_sites(), initial.n_particles())?);
    let need = initial.n_particles().saturating_sub(1);
    let allowed: Vec<bool> = basis.iter().map(|s| s.overlap(initial) >= need).collect();
    let psi0 = WaveVector::<R>::basis_ket(basis, &initial.sites())?;
    let result = evolve_oracle(h, &psi0, grid)?;
    let leak_series: Vec<f64> = result
        .rows
        .iter()
        .map(|r| r.iter().zip(&allowed).filter(|(_, &a)| !a).map(|(p, _)| *p).fold(0.0, f64::max))
        .collect();
    let leak = leak_series.iter().copied().fold(0.0, f64::max);
    Ok(SupportProfile { result, allowed, leak_series, leak })
}

fn check_marked(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("marked model needs N >= 3, got {n}")));
    }
    Ok(())
}

/// `(N-2)² + 4(N-1)β²`, the squared level splitting seen by site 1.
pub fn marked_gap_sq<R: Real>(n: usize, beta: R) -> R {
    let m = R::from_int(n as i64 - 2);
    m * m + R::from_int(4 * (n as i64 - 1)) * beta * beta
}

/// `1 - 2(N-1)β²(1 - cos tΔ)/Δ²` with `Δ² = (N-2)² + 4(N-1)β²`.
pub fn marked_p11<R: Real>(n: usize, beta: R, t: R) -> Result<R> {
    check_marked(n)?;
    let gap_sq = marked_gap_sq(n, beta);
    let coupling = R::from_int(2 * (n as i64 - 1)) * beta * beta;
    Ok(R::one() - coupling * (R::one() - (t * gap_sq.sqrt()).cos()) / gap_sq)
}

/// Deepest dip of [`marked_p11`], `4(N-1)β²/Δ²`.
pub fn marked_max_dip<R: Real>(n: usize, beta: R) -> Result<R> {
    check_marked(n)?;
    Ok(R::from_int(4 * (n as i64 - 1)) * beta * beta / marked_gap_sq(n, beta))
}

/// Return probability of reduced basis vector `which` (0 = |1⟩, 1 = |2⟩,
/// 2 = symmetric rest) under the 3×3 marked-model reduction.
pub fn marked_reduced_series<R: Real>(n: usize, beta: R, which: usize, grid: &TimeGrid) -> Result<Vec<R>> {
    if which > 2 {
        return Err(Error::InvalidArgument(format!("reduced basis index {which} outside 0..=2")));
    }
    grid.validate()?;
    let eig = marked_reduced_matrix(n, beta)?.symmetric_eigen();
    let start: Vector3<R> = Vector3::ith(which, R::one());
    let weights: Vec<R> = (0..3).map(|m| eig.eigenvectors.column(m).dot(&start).powi(2)).collect();
    Ok(grid
        .times()
        .iter()
        .map(|&t| {
            let t = R::lit(t);
            let amp = (0..3).fold(Complex::zero(), |acc: Complex<R>, m| acc + cis(-eig.eigenvalues[m] * t) * weights[m]);
            amp.norm_sqr()
        })
        .collect())
}

/// `|⟨2|2(t)⟩|²` series of the marked model.
pub fn marked_p22<R: Real>(n: usize, beta: R, grid: &TimeGrid) -> Result<Vec<R>> {
    marked_reduced_series(n, beta, 1, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::{build_hopping, build_marked};
    use std::f64::consts::PI;

    fn grid(n: usize) -> TimeGrid {
        TimeGrid::new(0.0, 5.0, n).unwrap()
    }

    #[test]
    fn time_grid() {
        let g = TimeGrid::new(0.0, 1.0, 5).unwrap();
        assert_eq!(g.times(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(TimeGrid::new(0.0, 1.0, 1).is_err());
        assert!(TimeGrid::new(1.0, 1.0, 4).is_err());
        assert_eq!(TimeGrid::default().n_points, 400);
    }

    #[test]
    fn zero_hamiltonian_is_static() {
        let basis = Arc::new(SectorBasis::new(4, 2).unwrap());
        let psi = WaveVector::<f64>::basis_ket(basis, &[1, 3]).unwrap();
        let h = SectorOperator::<f64>::zeros(6, 6);
        let r = evolve_oracle(&h, &psi, &grid(7)).unwrap();
        let c = psi.basis().rank(&OccupationState::from_sites(&[1, 3], 4).unwrap()).unwrap();
        for row in &r.rows {
            assert!((row[c] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn two_site_cos_squared() {
        let basis = Arc::new(SectorBasis::new(2, 1).unwrap());
        let psi = WaveVector::<f64>::basis_ket(basis, &[1]).unwrap();
        let r = evolve_oracle(&build_hopping(2, 1).unwrap(), &psi, &grid(50)).unwrap();
        for (t, row) in r.times().iter().zip(&r.rows) {
            assert!((row[0] - t.cos().powi(2)).abs() < 1e-13);
        }
        assert!(r.max_norm_error() < 1e-13);
    }

    #[test]
    fn non_hermitian_input() {
        let basis = Arc::new(SectorBasis::new(2, 1).unwrap());
        let psi = WaveVector::<f64>::basis_ket(basis, &[1]).unwrap();
        let h = SectorOperator::from_rows(&[vec![0.0, 1.0], vec![0.5, 0.0]]);
        assert!(matches!(evolve_oracle(&h, &psi, &grid(3)), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn propagator_special_times() {
        let n = 5;
        let id = propagator_1fermion::<f64>(n, 0.0).unwrap();
        let one = SectorOperator::identity(n);
        assert!(id.max_abs_diff(&one) < 1e-15);
        let t = 2.0 * PI / n as f64;
        let u = propagator_1fermion::<f64>(n, t).unwrap();
        assert!(u.max_abs_diff(&one.scale(cis(t))) < 1e-14);
        let oracle = SpectralEvolver::new(&build_hopping::<f64>(n, 1).unwrap()).unwrap().propagator(0.7);
        assert!(propagator_1fermion::<f64>(n, 0.7).unwrap().max_abs_diff(&oracle) < 1e-12);
    }

    #[test]
    fn one_fermion_probabilities() {
        assert_eq!(return_prob_1fermion::<f64>(4, 0.0), 1.0);
        assert_eq!(spread_prob_1fermion::<f64>(4, 0.0), 0.0);
        let t = PI / 4.0;
        assert!((return_prob_1fermion::<f64>(4, t) - 0.25).abs() < 1e-15);
        assert!((spread_prob_1fermion::<f64>(4, t) - 0.25).abs() < 1e-15);
        assert!((localisation_floor::<f64>(100, 1) - 0.9604).abs() < 1e-15);
        assert!(return_prob_kfermion::<f64>(4, 2, t).abs() < 1e-15);
        assert!((localisation_floor::<f64>(20, 2) - 0.64).abs() < 1e-15);
        let (_, min) = min_return_prob_kfermion(20, 2);
        assert!((min - 0.64).abs() < 1e-12);
    }

    #[test]
    fn two_fermion_amplitude_examples() {
        assert!((amplitude_2fermion::<f64>((1, 2), (1, 2), 6, 0.0).unwrap() - Complex::new(1.0, 0.0)).norm() < 1e-14);
        for t in [0.3, 1.1, 2.9] {
            assert!(amplitude_2fermion::<f64>((1, 2), (3, 4), 6, t).unwrap().norm() < 1e-14);
        }
        let basis = SectorBasis::new(6, 2).unwrap();
        let u = SpectralEvolver::new(&build_hopping::<f64>(6, 2).unwrap()).unwrap().propagator(0.9);
        let idx = |a, b| basis.rank(&OccupationState::from_sites(&[a, b], 6).unwrap()).unwrap();
        let closed = amplitude_2fermion::<f64>((1, 2), (1, 3), 6, 0.9).unwrap();
        assert!((closed - u.get(idx(1, 3), idx(1, 2))).norm() < 1e-11);
        assert!(amplitude_2fermion::<f64>((1, 1), (1, 2), 6, 0.1).is_err());
    }

    #[test]
    fn k_fermion_amplitude_matches_oracle() {
        let (n, k) = (6, 3);
        let basis = SectorBasis::new(n, k).unwrap();
        let u = SpectralEvolver::new(&build_hopping::<f64>(n, k).unwrap()).unwrap().propagator(1.3);
        for (c, from) in basis.iter().enumerate() {
            for (r, to) in basis.iter().enumerate() {
                let a = amplitude_kfermion::<f64>(&from, &to, 1.3).unwrap();
                assert!((a - u.get(r, c)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn csv_round_trip() {
        let basis = Arc::new(SectorBasis::new(4, 2).unwrap());
        let psi = WaveVector::<f64>::basis_ket(basis, &[1, 2]).unwrap();
        let r = evolve_oracle(&build_hopping(4, 2).unwrap(), &psi, &grid(11)).unwrap();
        let csv = r.to_csv();
        assert!(csv.starts_with("t,1|2,1|3,2|3,1|4,2|4,3|4\n"));
        let back = WalkResult::from_csv(&format!("{csv}# footer\n")).unwrap();
        assert_eq!(back.labels, r.labels);
        assert!(back.max_abs_diff(&r) < 1e-11);
        assert!((back.grid.t_end - r.grid.t_end).abs() < 1e-11);
        assert!(WalkResult::from_csv("x,1\n0,1\n1,1\n").is_err());
    }

    #[test]
    fn support_one_fermion_has_no_forbidden_targets() {
        let start = OccupationState::from_sites(&[2], 5).unwrap();
        let p = support_profile(&build_hopping::<f64>(5, 1).unwrap(), &start, &grid(20)).unwrap();
        assert!(p.allowed.iter().all(|&a| a));
        assert_eq!(p.leak, 0.0);
    }

    #[test]
    fn marked_limits() {
        for t in [0.0, 0.4, 3.0] {
            assert_eq!(marked_p11::<f64>(5, 0.0, t).unwrap(), 1.0);
            let a = marked_p11::<f64>(5, 1.0, t).unwrap();
            assert!((a - return_prob_1fermion::<f64>(5, t)).abs() < 1e-14);
        }
        let dip = marked_max_dip::<f64>(4, 0.05).unwrap();
        assert!((dip - 0.03 / 4.03).abs() < 1e-15);
        assert!(marked_p11::<f64>(2, 0.5, 1.0).is_err());
    }

    #[test]
    fn marked_reduction_matches_full_sector() {
        let (n, beta) = (6, 0.3);
        let g = grid(40);
        let reduced = marked_reduced_series::<f64>(n, beta, 0, &g).unwrap();
        let p22 = marked_p22::<f64>(n, beta, &g).unwrap();
        let basis = Arc::new(SectorBasis::new(n, 1).unwrap());
        let h = build_marked::<f64>(n, 1, beta).unwrap();
        let full1 = evolve_oracle(&h, &WaveVector::basis_ket(Arc::clone(&basis), &[1]).unwrap(), &g).unwrap();
        let full2 = evolve_oracle(&h, &WaveVector::basis_ket(basis, &[2]).unwrap(), &g).unwrap();
        for (i, t) in g.times().into_iter().enumerate() {
            let closed = marked_p11::<f64>(n, beta, t).unwrap();
            assert!((closed - reduced[i]).abs() < 1e-12);
            assert!((closed - full1.rows[i][0]).abs() < 1e-12);
            assert!((p22[i] - full2.rows[i][1]).abs() < 1e-12);
        }
    }
}

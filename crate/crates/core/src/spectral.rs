//! Analytic diagonalization of the all-to-all hopping model.
//!
//! The discrete Fourier modes `A_α = N^{-1/2} Σ_j ω^{jα} a_j` with
//! `ω = e^{2πi/N}` turn the hopping Hamiltonian into `N A†_N A_N - N̂`, so each
//! sector has exactly two levels: `N - k` on the image of `A†_N` and `-k` on the
//! kernel of `A_N`. This module provides those modes, the level summary, the
//! explicit position-space eigenvector families, the marked-site reduction,
//! and a dense eigensolver used as the numerical reference.

use std::sync::Arc;

use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    annihilation_matrix, apply_creation, creation_matrix, fock_annihilation, fock_creation, FockBasis,
    OccupationState, SectorBasis, WaveVector,
};
use crate::limits::binomial;
use crate::operator::SectorOperator;
use crate::scalar::{cis, Real, Scalar};

/// Eigenvalues closer than this are one level.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Largest sector the dense eigensolver accepts.
pub const DENSE_EIGEN_MAX_DIM: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub e: f64,
    pub mult: usize,
}

/// Distinct eigenvalues of one sector with their multiplicities, highest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub k: usize,
    pub levels: Vec<Level>,
}

impl SpectrumSummary {
    /// Groups eigenvalues whose gaps are below `tol`.
    pub fn from_eigenvalues(k: usize, eigenvalues: &[f64], tol: f64) -> Self {
        let mut sorted = eigenvalues.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let mut levels: Vec<(f64, usize)> = Vec::new();
        for e in sorted {
            match levels.last_mut() {
                Some((last, m)) if (*last - e).abs() <= tol => {
                    // running mean keeps the reported level centred
                    *last = (*last * *m as f64 + e) / (*m as f64 + 1.0);
                    *m += 1;
                }
                _ => levels.push((e, 1)),
            }
        }
        // rounding noise around a zero level would otherwise print as -1e-16
        let levels = levels.into_iter().map(|(e, mult)| Level { e: if e.abs() <= tol { 0.0 } else { e }, mult });
        SpectrumSummary { k, levels: levels.collect() }
    }

    pub fn dim(&self) -> usize {
        self.levels.iter().map(|l| l.mult).sum()
    }

    /// Level-by-level comparison: same multiplicities, eigenvalues within `tol`.
    pub fn matches(&self, other: &SpectrumSummary, tol: f64) -> bool {
        self.k == other.k
            && self.levels.len() == other.levels.len()
            && self
                .levels
                .iter()
                .zip(&other.levels)
                .all(|(a, b)| a.mult == b.mult && (a.e - b.e).abs() <= tol)
    }
}

/// Two-level spectrum of the hopping model on `k` of `N` sites:
/// `N - k` with multiplicity `C(N-1, k-1)` and `-k` with multiplicity `C(N-1, k)`.
pub fn analytic_spectrum(n: usize, k: usize) -> Result<SpectrumSummary> {
    if k == 0 || k >= n {
        return Err(Error::SectorOutOfRange { k, n_sites: n });
    }
    Ok(SpectrumSummary {
        k,
        levels: vec![
            Level { e: (n - k) as f64, mult: binomial(n - 1, k - 1) as usize },
            Level { e: -(k as f64), mult: binomial(n - 1, k) as usize },
        ],
    })
}

/// Dense symmetric eigendecomposition, eigenvalues ascending with matching
/// eigenvector columns.
pub fn dense_eigen<R: Real>(op: &SectorOperator<R>) -> Result<(Vec<R>, DMatrix<R>)> {
    if op.rows() > DENSE_EIGEN_MAX_DIM {
        return Err(Error::DimensionOverflow { dim: op.rows() as u128, cap: DENSE_EIGEN_MAX_DIM as u128 });
    }
    let residual = op.hermiticity_residual();
    if residual > 1e-10 {
        return Err(Error::NotHermitian { residual });
    }
    let eig = op.to_nalgebra().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).expect("finite eigenvalues"));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(op.rows(), op.rows(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Numerical level structure of any real symmetric sector operator.
pub fn numeric_spectrum<R: Real>(op: &SectorOperator<R>, k: usize) -> Result<SpectrumSummary> {
    let (values, _) = dense_eigen(op)?;
    let values: Vec<f64> = values.into_iter().map(Real::as_f64).collect();
    Ok(SpectrumSummary::from_eigenvalues(k, &values, DEGENERACY_TOL))
}

fn check_mode(alpha: usize, n: usize) -> Result<()> {
    if alpha == 0 || alpha > n {
        return Err(Error::InvalidArgument(format!("mode index {alpha} outside 1..={n}")));
    }
    Ok(())
}

/// `ω^{power}` with the exponent reduced modulo `N` first.
pub fn root_of_unity<R: Real>(power: i64, n: usize) -> Complex<R> {
    let m = power.rem_euclid(n as i64);
    cis(R::two_pi() * R::from_int(m) / R::from_int(n as i64))
}

fn mode_combination<R: Real>(
    alpha: usize,
    n: usize,
    conjugate: bool,
    site_op: impl Fn(usize) -> Result<SectorOperator<R>>,
) -> Result<SectorOperator<Complex<R>>> {
    check_mode(alpha, n)?;
    let norm = R::one() / R::from_int(n as i64).sqrt();
    let mut acc: Option<SectorOperator<Complex<R>>> = None;
    for j in 1..=n {
        let power = (j * alpha) as i64;
        let phase = root_of_unity::<R>(if conjugate { -power } else { power }, n) * norm;
        let term = site_op(j)?.map(|&v| phase * v);
        acc = Some(match acc {
            Some(a) => &a + &term,
            None => term,
        });
    }
    Ok(acc.expect("at least one site"))
}

/// `A_α` as a map from the `k`-sector to the `(k-1)`-sector.
pub fn mode_annihilation<R: Real>(alpha: usize, basis: &SectorBasis) -> Result<SectorOperator<Complex<R>>> {
    mode_combination(alpha, basis.n_sites(), false, |j| annihilation_matrix(basis, j))
}

/// `A†_α` as a map from the `k`-sector to the `(k+1)`-sector.
pub fn mode_creation<R: Real>(alpha: usize, basis: &SectorBasis) -> Result<SectorOperator<Complex<R>>> {
    mode_combination(alpha, basis.n_sites(), true, |j| creation_matrix(basis, j))
}

/// `A_α` on the full Fock space.
pub fn fock_mode_annihilation<R: Real>(alpha: usize, fock: &FockBasis) -> Result<SectorOperator<Complex<R>>> {
    mode_combination(alpha, fock.n_sites(), false, |j| fock_annihilation(fock, j))
}

/// `A†_α` on the full Fock space.
pub fn fock_mode_creation<R: Real>(alpha: usize, fock: &FockBasis) -> Result<SectorOperator<Complex<R>>> {
    mode_combination(alpha, fock.n_sites(), true, |j| fock_creation(fock, j))
}

/// `A†_α A_β` on one sector.
pub fn mode_bilinear<R: Real>(alpha: usize, beta: usize, basis: &SectorBasis) -> Result<SectorOperator<Complex<R>>> {
    if basis.n_particles() == 0 {
        return Ok(SectorOperator::zeros(1, 1));
    }
    let lower = SectorBasis::new(basis.n_sites(), basis.n_particles() - 1)?;
    let annihilate = mode_annihilation::<R>(beta, basis)?;
    let create = mode_creation::<R>(alpha, &lower)?;
    Ok(create.matmul(&annihilate))
}

// a†_{c1} … a†_{cm} |Ω⟩ as a signed basis ket; None if a site repeats
fn product_ket(creators: &[usize], n: usize) -> Option<(i8, OccupationState)> {
    let mut state = OccupationState::vacuum(n).expect("valid site count");
    let mut sign = 1i8;
    for &site in creators.iter().rev() {
        let (s, next) = apply_creation(state, site).expect("site in range")?;
        sign *= s;
        state = next;
    }
    Some((sign, state))
}

fn index_tuples(max_site: usize, size: usize) -> Result<Vec<Vec<usize>>> {
    if size == 0 {
        return Ok(vec![Vec::new()]);
    }
    if max_site == 0 {
        return Ok(Vec::new());
    }
    Ok(SectorBasis::new(max_site, size)?.iter().map(|s| s.sites()).collect())
}

fn check_family_sector(n: usize, k: usize) -> Result<()> {
    if n < 2 || k == 0 || k >= n {
        return Err(Error::SectorOutOfRange { k, n_sites: n });
    }
    Ok(())
}

/// The `N - k` eigenvectors `a†_{i1} … a†_{i(k-1)} Σ_{j ∉ I} a†_j |Ω⟩ / √(N-k+1)`,
/// one per tuple `i1 < … < i(k-1)` from `1..N-1`.
pub fn eigenvectors_high<R: Real>(n: usize, k: usize) -> Result<Vec<WaveVector<R>>> {
    check_family_sector(n, k)?;
    let basis = Arc::new(SectorBasis::new(n, k)?);
    let norm = R::one() / R::from_int((n - k + 1) as i64).sqrt();
    let mut out = Vec::new();
    for tuple in index_tuples(n - 1, k - 1)? {
        let mut v = WaveVector::zeros(Arc::clone(&basis));
        for j in (1..=n).filter(|j| !tuple.contains(j)) {
            let mut creators = tuple.clone();
            creators.push(j);
            let (sign, ket) = product_ket(&creators, n).expect("distinct sites");
            let idx = basis.rank(&ket).expect("k-fermion ket");
            v.amps_mut()[idx] += Complex::new(R::from_int(sign as i64) * norm, R::zero());
        }
        out.push(v);
    }
    Ok(out)
}

/// The `-k` eigenvectors.
///
/// For `k ≥ 2`, one vector per tuple `i1 < … < ik` from `1..N-1`: the
/// alternating sum over the `k + 1` ways of dropping one site from
/// `{i1, …, ik, N}`, normalized by `1/√(k+1)` and signed so that the
/// `a†_{i1} … a†_{ik}` term is `+1`. For `k = 1` the family is
/// `(a†_1 - a†_j)|Ω⟩ / √2` for `j = 2..N`.
pub fn eigenvectors_low<R: Real>(n: usize, k: usize) -> Result<Vec<WaveVector<R>>> {
    check_family_sector(n, k)?;
    if k == 1 {
        let basis = Arc::new(SectorBasis::new(n, 1)?);
        let h = R::one() / R::from_int(2).sqrt();
        return Ok((2..=n)
            .map(|j| {
                let mut v = WaveVector::zeros(Arc::clone(&basis));
                v.amps_mut()[0] = Complex::new(h, R::zero());
                v.amps_mut()[j - 1] = Complex::new(-h, R::zero());
                v
            })
            .collect());
    }
    eigenvectors_low_cyclic(n, k)
}

/// The alternating-sum family for every `k`, including `k = 1`, where it gives
/// `(a†_i - a†_N)|Ω⟩ / √2`.
pub fn eigenvectors_low_cyclic<R: Real>(n: usize, k: usize) -> Result<Vec<WaveVector<R>>> {
    check_family_sector(n, k)?;
    let basis = Arc::new(SectorBasis::new(n, k)?);
    let norm = R::one() / R::from_int((k + 1) as i64).sqrt();
    let overall = if k.is_multiple_of(2) { 1 } else { -1 };
    let mut out = Vec::new();
    for tuple in index_tuples(n - 1, k)? {
        let mut closed = tuple.clone();
        closed.push(n);
        let mut v = WaveVector::zeros(Arc::clone(&basis));
        for drop in 0..closed.len() {
            let sites: Vec<usize> =
                closed.iter().enumerate().filter(|&(p, _)| p != drop).map(|(_, &s)| s).collect();
            let ket = OccupationState::from_sites(&sites, n)?;
            let idx = basis.rank(&ket).expect("k-fermion ket");
            let sign = if drop % 2 == 0 { overall } else { -overall };
            v.amps_mut()[idx] += Complex::new(R::from_int(sign) * norm, R::zero());
        }
        out.push(v);
    }
    Ok(out)
}

/// Modified Gram–Schmidt; vectors whose remainder has norm below `tol` are dropped.
pub fn orthonormalize<R: Real>(vectors: &[WaveVector<R>], tol: R) -> Vec<WaveVector<R>> {
    let mut out: Vec<WaveVector<R>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for q in &out {
            let c = q.inner(&w);
            for (a, b) in w.amps_mut().iter_mut().zip(q.amps()) {
                *a -= *b * c;
            }
        }
        if w.norm() > tol {
            w.normalize();
            out.push(w);
        }
    }
    out
}

/// Rank of a family of vectors, from the eigenvalues of its Gram matrix.
pub fn family_rank<R: Real>(vectors: &[WaveVector<R>], tol: R) -> usize {
    let m = vectors.len();
    let gram = DMatrix::from_fn(m, m, |i, j| vectors[i].inner(&vectors[j]));
    let eig = gram.symmetric_eigen();
    eig.eigenvalues.iter().filter(|&&e| e > tol).count()
}

/// Marked-site Hamiltonian on one fermion restricted to
/// `{|1⟩, |2⟩, (|3⟩ + … + |N⟩)/√(N-2)}`.
pub fn marked_reduced_matrix<R: Real>(n: usize, beta: R) -> Result<Matrix3<R>> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("marked reduction needs N >= 3, got {n}")));
    }
    let s = R::from_int(n as i64 - 2).sqrt();
    let z = R::zero();
    Ok(Matrix3::new(
        z, beta, beta * s, //
        beta, z, s, //
        beta * s, s, R::from_int(n as i64 - 3),
    ))
}

/// The three reduced basis vectors as 1-fermion wave vectors.
pub fn marked_reduced_basis<R: Real>(n: usize) -> Result<[WaveVector<R>; 3]> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("marked reduction needs N >= 3, got {n}")));
    }
    let basis = Arc::new(SectorBasis::new(n, 1)?);
    let first = WaveVector::basis_ket(Arc::clone(&basis), &[1])?;
    let second = WaveVector::basis_ket(Arc::clone(&basis), &[2])?;
    let mut rest = WaveVector::zeros(basis);
    let w = R::one() / R::from_int(n as i64 - 2).sqrt();
    for a in rest.amps_mut().iter_mut().skip(2) {
        *a = Complex::new(w, R::zero());
    }
    Ok([first, second, rest])
}

/// `max |⟨u|v⟩|` over all `u` in `left` and `v` in `right`.
pub fn max_cross_overlap<R: Real>(left: &[WaveVector<R>], right: &[WaveVector<R>]) -> f64 {
    left.iter()
        .flat_map(|u| right.iter().map(move |v| u.inner(v).magnitude()))
        .fold(0.0, f64::max)
}

/// Sum of mode number operators `Σ_α A†_α A_α` on a sector; equals `N̂`.
pub fn mode_number_operator<R: Real>(basis: &SectorBasis) -> Result<SectorOperator<Complex<R>>> {
    let mut acc = SectorOperator::zeros(basis.dim(), basis.dim());
    for alpha in 1..=basis.n_sites() {
        acc = &acc + &mode_bilinear::<R>(alpha, alpha, basis)?;
    }
    Ok(acc)
}

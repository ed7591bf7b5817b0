//! Permutation-invariant Hamiltonians on a fixed particle-number sector.
//!
//! Every builder returns a [`SectorOperator`] over the sector basis of
//! [`SectorBasis::new`]. All of them have integer entries apart from the
//! marked-site coupling, so they are generic over [`Scalar`] and can be
//! checked exactly over `i64`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{apply_annihilation, apply_creation, OccupationState, SectorBasis};
use crate::limits::binomial;
use crate::operator::SectorOperator;
use crate::permgroup::{conjugacy_class, CycleType, Permutation};
use crate::scalar::{Real, Scalar};

/// Largest chain for which the `2^N` Pauli construction is allowed.
pub const MAX_PAULI_SITES: usize = 12;

fn sector(n: usize, k: usize) -> Result<SectorBasis> {
    SectorBasis::new(n, k)
}

fn binom_i64(n: usize, k: usize) -> i64 {
    binomial(n, k) as i64
}

/// `Σ_edges w (a†_i a_j + a†_j a_i)` on one sector.
fn hopping_terms<T: Scalar>(basis: &SectorBasis, edges: &[(usize, usize, T)]) -> Result<SectorOperator<T>> {
    let mut triplets = Vec::new();
    for (col, state) in basis.iter().enumerate() {
        for (a, b, w) in edges {
            for (to, from) in [(*a, *b), (*b, *a)] {
                let Some((s1, mid)) = apply_annihilation(state, from)? else { continue };
                let Some((s2, image)) = apply_creation(mid, to)? else { continue };
                let row = basis.index_of_bits(image.bits()).expect("hop stays in sector");
                let sign = T::from_int((s1 * s2) as i64);
                triplets.push((row, col, sign * w.clone()));
            }
        }
    }
    Ok(SectorOperator::from_triplets(basis.dim(), basis.dim(), triplets))
}

/// All-to-all hopping `H = Σ_{i<j} (a†_i a_j + a†_j a_i)`.
pub fn build_hopping<T: Scalar>(n: usize, k: usize) -> Result<SectorOperator<T>> {
    let basis = sector(n, k)?;
    let edges: Vec<_> = (1..=n)
        .flat_map(|i| (i + 1..=n).map(move |j| (i, j, T::one())))
        .collect();
    hopping_terms(&basis, &edges)
}

/// Site 1 couples with weight `beta`; sites `2..=N` hop among themselves with weight 1.
pub fn build_marked<T: Scalar>(n: usize, k: usize, beta: T) -> Result<SectorOperator<T>> {
    let basis = sector(n, k)?;
    let mut edges: Vec<_> = (2..=n).map(|j| (1, j, beta.clone())).collect();
    edges.extend((2..=n).flat_map(|i| (i + 1..=n).map(move |j| (i, j, T::one()))));
    hopping_terms(&basis, &edges)
}

/// Nearest-neighbour tight binding on a ring, site `N + 1 ≡ 1`.
pub fn build_ring<T: Scalar>(n: usize, k: usize) -> Result<SectorOperator<T>> {
    let basis = sector(n, k)?;
    let edges: Vec<_> = (1..=n).map(|j| (j, j % n + 1, T::one())).collect();
    hopping_terms(&basis, &edges)
}

/// Sum of the sector realizations of every element of a conjugacy class.
///
/// The transposition class uses the closed form
/// `H + (C(N-k,2) - C(k,2)) 1`; every other class is streamed through
/// [`build_class_hamiltonian_streamed`].
pub fn build_class_hamiltonian<T: Scalar>(ct: &CycleType, k: usize) -> Result<SectorOperator<T>> {
    let n = ct.n();
    if n >= 2 && *ct == CycleType::p_cycle(2, n)? {
        let basis = sector(n, k)?;
        let shift = binom_i64(n - k, 2) - binom_i64(k, 2);
        let hop = build_hopping::<T>(n, k)?;
        return Ok(&hop + &SectorOperator::identity(basis.dim()).scale(T::from_int(shift)));
    }
    build_class_hamiltonian_streamed(ct, k)
}

/// Class sum accumulated element by element; the reference for every fast path.
pub fn build_class_hamiltonian_streamed<T: Scalar>(ct: &CycleType, k: usize) -> Result<SectorOperator<T>> {
    let basis = sector(ct.n(), k)?;
    let mut acc: HashMap<(usize, usize), i64> = HashMap::new();
    for sigma in conjugacy_class(ct)? {
        for (col, state) in basis.iter().enumerate() {
            let (sign, image) = sigma.act_on(state);
            let row = basis.index_of_bits(image.bits()).expect("permutation preserves sector");
            *acc.entry((row, col)).or_insert(0) += sign as i64;
        }
    }
    Ok(SectorOperator::from_triplets(
        basis.dim(),
        basis.dim(),
        acc.into_iter().map(|((i, j), v)| (i, j, T::from_int(v))).collect::<Vec<_>>(),
    ))
}

/// The bilinear class operator `Σ_σ Σ_i a†_{σ(i)} a_i` on the `k`-sector.
///
/// On one fermion it coincides with the class sum; on `k ≥ 2` fermions it is a
/// different operator, equal to `H + k (N-1)(N-2)/2` for the transposition class.
pub fn build_class_bilinear<T: Scalar>(ct: &CycleType, k: usize) -> Result<SectorOperator<T>> {
    let n = ct.n();
    let basis = sector(n, k)?;
    let mut acc: HashMap<(usize, usize), i64> = HashMap::new();
    for sigma in conjugacy_class(ct)? {
        for (col, state) in basis.iter().enumerate() {
            for site in 1..=n {
                let Some((s1, mid)) = apply_annihilation(state, site)? else { continue };
                let Some((s2, image)) = apply_creation(mid, sigma.apply(site))? else { continue };
                let row = basis.index_of_bits(image.bits()).expect("bilinear stays in sector");
                *acc.entry((row, col)).or_insert(0) += (s1 * s2) as i64;
            }
        }
    }
    Ok(SectorOperator::from_triplets(
        basis.dim(),
        basis.dim(),
        acc.into_iter().map(|((i, j), v)| (i, j, T::from_int(v))).collect::<Vec<_>>(),
    ))
}

/// Quartic transposition-class operator
/// `Σ_σ Σ_{i<j} a†_{σ(i)} a†_{σ(j)} a_j a_i`, built term by term.
pub fn build_quartic2<T: Scalar>(n: usize, k: usize) -> Result<SectorOperator<T>> {
    let basis = sector(n, k)?;
    let transpositions: Vec<Permutation> = if n >= 2 {
        conjugacy_class(&CycleType::p_cycle(2, n)?)?.collect()
    } else {
        Vec::new()
    };
    let mut acc: HashMap<(usize, usize), i64> = HashMap::new();
    for (col, state) in basis.iter().enumerate() {
        let occupied = state.sites();
        for (a, &i) in occupied.iter().enumerate() {
            for &j in &occupied[a + 1..] {
                for sigma in &transpositions {
                    if let Some((sign, image)) = quartic_term(state, i, j, sigma)? {
                        let row = basis.index_of_bits(image.bits()).expect("quartic stays in sector");
                        *acc.entry((row, col)).or_insert(0) += sign;
                    }
                }
            }
        }
    }
    Ok(SectorOperator::from_triplets(
        basis.dim(),
        basis.dim(),
        acc.into_iter().map(|((r, c), v)| (r, c, T::from_int(v))).collect::<Vec<_>>(),
    ))
}

// a†_{σ(i)} a†_{σ(j)} a_j a_i on a basis ket, right to left
fn quartic_term(
    state: OccupationState,
    i: usize,
    j: usize,
    sigma: &Permutation,
) -> Result<Option<(i64, OccupationState)>> {
    let mut sign = 1i64;
    let mut cur = state;
    for (create, site) in [(false, i), (false, j), (true, sigma.apply(j)), (true, sigma.apply(i))] {
        let step = if create { apply_creation(cur, site)? } else { apply_annihilation(cur, site)? };
        match step {
            Some((s, next)) => {
                sign *= s as i64;
                cur = next;
            }
            None => return Ok(None),
        }
    }
    Ok(Some((sign, cur)))
}

/// Closed form of the quartic operator on the `k`-sector:
/// `½ (C(N-2,2) - 1) (N̂² - N̂) + H (N̂ - 1)`.
pub fn quartic2_closed_form<T: Scalar>(n: usize, k: usize) -> Result<SectorOperator<T>> {
    let basis = sector(n, k)?;
    let pairs = (k * k.saturating_sub(1) / 2) as i64;
    let diag = (binom_i64(n.saturating_sub(2), 2) - 1) * pairs;
    let hop = build_hopping::<T>(n, k)?.scale(T::from_int(k as i64 - 1));
    Ok(&hop + &SectorOperator::identity(basis.dim()).scale(T::from_int(diag)))
}

/// Symmetric XXX chain on the sector with `down` flipped spins: the sum of all
/// site swaps `(1 + X_j X_l + Y_j Y_l + Z_j Z_l)/2`.
///
/// Swaps act on bit patterns directly; bit `j - 1` set means spin `j` is down.
pub fn build_xxx_spin<T: Scalar>(n: usize, down: usize) -> Result<SectorOperator<T>> {
    let basis = sector(n, down)?;
    let same_pairs = binom_i64(down, 2) + binom_i64(n - down, 2);
    let mut triplets = Vec::new();
    for (col, &bits) in basis.bits().iter().enumerate() {
        triplets.push((col, col, T::from_int(same_pairs)));
        for j in 0..n {
            for l in j + 1..n {
                if (bits >> j) & 1 != (bits >> l) & 1 {
                    let swapped = bits ^ (1 << j) ^ (1 << l);
                    let row = basis.index_of_bits(swapped).expect("swap keeps the down count");
                    triplets.push((row, col, T::one()));
                }
            }
        }
    }
    Ok(SectorOperator::from_triplets(basis.dim(), basis.dim(), triplets))
}

/// Reference construction of the symmetric XXX chain on the full `2^N` space
/// from Pauli tensor products, `½ Σ_{j<l} (X_j X_l + Y_j Y_l + Z_j Z_l) + N(N-1)/4`.
/// Index = bit pattern, bit set = spin down.
pub fn pauli_xxx_full<R: Real>(n: usize) -> Result<SectorOperator<num_complex::Complex<R>>> {
    use num_complex::Complex;
    if n == 0 || n > MAX_PAULI_SITES {
        return Err(Error::TooManySites { n_sites: n, max: MAX_PAULI_SITES });
    }
    let dim = 1usize << n;
    let one = Complex::new(R::one(), R::zero());
    let i = Complex::new(R::zero(), R::one());
    // single-site Pauli action on basis bit b: (image bit, phase)
    let pauli = |which: u8, b: u64| -> (u64, Complex<R>) {
        match which {
            b'X' => (b ^ 1, one),
            // Y|↑⟩ = i|↓⟩, Y|↓⟩ = -i|↑⟩
            b'Y' => (b ^ 1, if b == 0 { i } else { -i }),
            _ => (b, if b == 0 { one } else { -one }),
        }
    };
    let half = Complex::new(R::lit(0.5), R::zero());
    let mut triplets = Vec::new();
    for col in 0..dim as u64 {
        triplets.push((col as usize, col as usize, Complex::new(R::from_int((n * (n - 1)) as i64) / R::from_int(4), R::zero())));
        for j in 0..n {
            for l in j + 1..n {
                for which in *b"XYZ" {
                    let (bj, pj) = pauli(which, (col >> j) & 1);
                    let (bl, pl) = pauli(which, (col >> l) & 1);
                    let row = (col & !(1 << j) & !(1 << l)) | (bj << j) | (bl << l);
                    triplets.push((row as usize, col as usize, half * pj * pl));
                }
            }
        }
    }
    Ok(SectorOperator::from_triplets(dim, dim, triplets))
}

/// Rows and columns of a `2^N` operator belonging to the `down`-spin sector.
pub fn restrict_to_sector<T: Scalar>(full: &SectorOperator<T>, n: usize, down: usize) -> Result<SectorOperator<T>> {
    let basis = sector(n, down)?;
    let idx: Vec<usize> = basis.bits().iter().map(|&b| b as usize).collect();
    Ok(full.submatrix(&idx, &idx))
}

/// Model families understood by [`ModelSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    ClassSum,
    Hopping,
    Quartic2,
    Marked,
    Ring,
    XxxSpin,
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        serde_plain_family(s).ok_or_else(|| Error::Parse(format!("unknown model family {s:?}")))
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::ClassSum => "class_sum",
            Family::Hopping => "hopping",
            Family::Quartic2 => "quartic2",
            Family::Marked => "marked",
            Family::Ring => "ring",
            Family::XxxSpin => "xxx_spin",
        })
    }
}

fn serde_plain_family(s: &str) -> Option<Family> {
    Some(match s {
        "class_sum" => Family::ClassSum,
        "hopping" => Family::Hopping,
        "quartic2" => Family::Quartic2,
        "marked" => Family::Marked,
        "ring" => Family::Ring,
        "xxx_spin" => Family::XxxSpin,
        _ => return None,
    })
}

/// Serializable description of one Hamiltonian on one sector, e.g.
/// `{"family":"marked","N":6,"k":1,"beta":0.3}`.
///
/// `k` is the particle number, or the number of down spins for `xxx_spin`
/// (where `down` is accepted as an alias). `class_sum` takes either `p`
/// (a single `p`-cycle) or a full `cycle_type`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: Family,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(alias = "down")]
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycle_type: Option<Vec<usize>>,
}

impl ModelSpec {
    pub fn new(family: Family, n: usize, k: usize) -> Self {
        ModelSpec { family, n, k, beta: None, p: None, cycle_type: None }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = Some(beta);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("N must be at least 1".into()));
        }
        if self.k > self.n {
            return Err(Error::SectorOutOfRange { k: self.k, n_sites: self.n });
        }
        match self.family {
            Family::Marked => match self.beta {
                Some(b) if b.is_finite() => {}
                Some(b) => return Err(Error::InvalidArgument(format!("beta must be finite, got {b}"))),
                None => return Err(Error::InvalidArgument("marked model needs beta".into())),
            },
            Family::ClassSum => {
                self.class_cycle_type()?;
            }
            _ => {}
        }
        Ok(())
    }

    /// Cycle type of a `class_sum` model; defaults to transpositions.
    pub fn class_cycle_type(&self) -> Result<CycleType> {
        match (&self.cycle_type, self.p) {
            (Some(_), Some(_)) => Err(Error::InvalidArgument("give either p or cycle_type, not both".into())),
            // a partial list of cycle lengths is padded with fixed points
            (Some(parts), None) => CycleType::padded(parts, self.n),
            (None, p) => CycleType::p_cycle(p.unwrap_or(2), self.n),
        }
    }

    pub fn build<R: Real>(&self) -> Result<SectorOperator<R>> {
        self.validate()?;
        let (n, k) = (self.n, self.k);
        match self.family {
            Family::ClassSum => build_class_hamiltonian(&self.class_cycle_type()?, k),
            Family::Hopping => build_hopping(n, k),
            Family::Quartic2 => build_quartic2(n, k),
            Family::Marked => build_marked(n, k, R::lit(self.beta.unwrap_or(1.0))),
            Family::Ring => build_ring(n, k),
            Family::XxxSpin => build_xxx_spin(n, k),
        }
    }

    pub fn basis(&self) -> Result<SectorBasis> {
        sector(self.n, self.k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(m: &SectorOperator<i64>) -> Vec<Vec<i64>> {
        m.to_dense_rows()
    }

    #[test]
    fn transposition_class_one_fermion() {
        let ct = CycleType::p_cycle(2, 3).unwrap();
        let h = build_class_hamiltonian_streamed::<i64>(&ct, 1).unwrap();
        assert_eq!(rows(&h), vec![vec![1; 3]; 3]);
        assert_eq!(build_class_hamiltonian::<i64>(&ct, 1).unwrap(), h);
    }

    #[test]
    fn three_cycle_class_one_fermion() {
        // (1 2 3) and (1 3 2) are cyclic shifts with no fixed site
        let ct = CycleType::p_cycle(3, 3).unwrap();
        let h = build_class_hamiltonian::<i64>(&ct, 1).unwrap();
        assert_eq!(rows(&h), vec![vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]);
    }

    #[test]
    fn vacuum_sector_counts_class() {
        for parts in [vec![2, 1, 1, 1], vec![3, 2], vec![4, 1]] {
            let ct = CycleType::from_parts(parts).unwrap();
            let h = build_class_hamiltonian_streamed::<i64>(&ct, 0).unwrap();
            assert_eq!(rows(&h), vec![vec![ct.class_size() as i64]]);
        }
    }

    #[test]
    fn hopping_small() {
        assert_eq!(rows(&build_hopping(2, 1).unwrap()), vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(rows(&build_hopping(3, 0).unwrap()), vec![vec![0]]);
        assert_eq!(rows(&build_hopping(3, 3).unwrap()), vec![vec![0]]);
    }

    #[test]
    fn fast_class_path_matches_stream() {
        for n in 2..=6 {
            let ct = CycleType::p_cycle(2, n).unwrap();
            for k in 0..=n {
                let fast = build_class_hamiltonian::<i64>(&ct, k).unwrap();
                let slow = build_class_hamiltonian_streamed::<i64>(&ct, k).unwrap();
                assert_eq!(fast, slow, "N={n} k={k}");
            }
        }
    }

    #[test]
    fn bilinear_class_operator_shift() {
        for n in 2..=6 {
            let ct = CycleType::p_cycle(2, n).unwrap();
            for k in 0..=n {
                let bil = build_class_bilinear::<i64>(&ct, k).unwrap();
                let shift = (k * (n - 1) * (n - 2) / 2) as i64;
                let expected = &build_hopping::<i64>(n, k).unwrap()
                    + &SectorOperator::identity(bil.rows()).scale(shift);
                assert_eq!(bil, expected, "N={n} k={k}");
            }
        }
    }

    #[test]
    fn quartic_vanishes_below_two_fermions() {
        for k in 0..=1 {
            let q = build_quartic2::<i64>(5, k).unwrap();
            assert_eq!(q.nnz(), 0);
        }
    }

    #[test]
    fn quartic_n4_k2_is_hopping() {
        // direct sum, computed independently of the closed form
        let q = build_quartic2::<i64>(4, 2).unwrap();
        assert_eq!(q, build_hopping(4, 2).unwrap());
    }

    #[test]
    fn marked_limits() {
        assert_eq!(build_marked::<i64>(5, 1, 1).unwrap(), build_hopping(5, 1).unwrap());
        let m = build_marked::<i64>(4, 1, 0).unwrap();
        assert_eq!(
            rows(&m),
            vec![vec![0, 0, 0, 0], vec![0, 0, 1, 1], vec![0, 1, 0, 1], vec![0, 1, 1, 0]]
        );
    }

    #[test]
    fn ring_small() {
        let r = build_ring::<i64>(4, 1).unwrap();
        assert_eq!(rows(&r)[0], vec![0, 1, 0, 1]);
        assert_eq!(build_ring::<i64>(3, 1).unwrap(), build_hopping(3, 1).unwrap());
        assert_eq!(build_ring::<i64>(3, 2).unwrap(), build_hopping(3, 2).unwrap());
    }

    #[test]
    fn xxx_one_down() {
        for n in 3..=8 {
            let h = build_xxx_spin::<i64>(n, 1).unwrap();
            let diag = ((n - 1) * (n - 2) / 2) as i64 - 1;
            let expected = SectorOperator::from_fn(n, n, |i, j| diag * (i == j) as i64 + 1);
            assert_eq!(h, expected, "N={n}");
        }
        assert_eq!(rows(&build_xxx_spin(3, 1).unwrap()), vec![vec![1; 3]; 3]);
        assert_eq!(rows(&build_xxx_spin(4, 0).unwrap()), vec![vec![6]]);
    }

    #[test]
    fn model_spec_json() {
        let spec: ModelSpec = serde_json::from_str(r#"{"family":"marked","N":6,"k":1,"beta":0.3}"#).unwrap();
        assert_eq!(spec, ModelSpec::new(Family::Marked, 6, 1).with_beta(0.3));
        assert_eq!(serde_json::to_string(&spec).unwrap(), r#"{"family":"marked","N":6,"k":1,"beta":0.3}"#);
        let spin: ModelSpec = serde_json::from_str(r#"{"family":"xxx_spin","N":3,"down":1}"#).unwrap();
        assert_eq!(spin.k, 1);
        let h = spin.build::<f64>().unwrap();
        assert_eq!(h.get(0, 1), 1.0);
        let bad: ModelSpec = serde_json::from_str(r#"{"family":"marked","N":6,"k":1}"#).unwrap();
        assert!(bad.validate().is_err());
        let cs: ModelSpec = serde_json::from_str(r#"{"family":"class_sum","N":4,"k":1,"cycle_type":[3]}"#).unwrap();
        assert_eq!(cs.class_cycle_type().unwrap().parts(), &[3, 1]);
        assert!(serde_json::from_str::<ModelSpec>(r#"{"family":"bogus","N":2,"k":1}"#).is_err());
    }
}

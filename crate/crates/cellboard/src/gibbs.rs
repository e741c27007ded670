//! Exact conditional Gibbs distributions on small square windows with
//! fixed boundary spins.
//!
//! Interior configurations are enumerated as bitmasks, so everything
//! here is limited to windows of side at most 5. Interior energies and
//! boundary couplings are tabulated once per window so that a sweep
//! over all boundary configurations reuses the interior work.

use crate::error::{Error, Result};
use crate::field::FieldSpec;

/// Maximum window side; keeps interior masks within 25 bits and
/// boundary masks within 24 bits.
pub const MAX_WINDOW_SIDE: usize = 5;

/// Beyond this, `exp(-x)` underflows to exactly 0.0 and the term can
/// be skipped without changing any sum.
const EXP_UNDERFLOW: f64 = 750.0;

/// Geometry of the square window `S_n`: interior sites, the exterior
/// sites sharing a bond with the interior, and both kinds of bonds.
///
/// Site orderings are fixed (row-major interior; boundary by side
/// bottom/top/left/right, then coordinate) so that bitmask indices are
/// stable across runs.
#[derive(Debug, Clone)]
pub struct SquareWindow {
    n: usize,
    interior: Vec<(i32, i32)>,
    boundary: Vec<(i32, i32)>,
    interior_bonds: Vec<(usize, usize)>,
    crossing_bonds: Vec<(usize, usize)>,
}

impl SquareWindow {
    pub fn side(&self) -> usize {
        self.n
    }

    pub fn interior_sites(&self) -> &[(i32, i32)] {
        &self.interior
    }

    pub fn boundary_sites(&self) -> &[(i32, i32)] {
        &self.boundary
    }

    pub fn interior_bonds(&self) -> &[(usize, usize)] {
        &self.interior_bonds
    }

    /// Pairs `(interior index, boundary index)`.
    pub fn crossing_bonds(&self) -> &[(usize, usize)] {
        &self.crossing_bonds
    }
}

/// Builds the window geometry for side length `n`, `1 <= n <= 5`.
pub fn build_window(n: usize) -> Result<SquareWindow> {
    if n == 0 || n > MAX_WINDOW_SIDE {
        return Err(Error::Bound(format!(
            "window side must be between 1 and {MAX_WINDOW_SIDE}, got {n}"
        )));
    }
    let ni = n as i32;
    let mut interior = Vec::with_capacity(n * n);
    for y in 0..ni {
        for x in 0..ni {
            interior.push((x, y));
        }
    }
    // Exterior neighbours only; the diagonal corners share no bond
    // with the interior.
    let mut boundary = Vec::with_capacity(4 * n);
    boundary.extend((0..ni).map(|x| (x, -1)));
    boundary.extend((0..ni).map(|x| (x, ni)));
    boundary.extend((0..ni).map(|y| (-1, y)));
    boundary.extend((0..ni).map(|y| (ni, y)));

    let index_of = |x: i32, y: i32| -> usize { (y * ni + x) as usize };
    let mut interior_bonds = Vec::new();
    for y in 0..ni {
        for x in 0..ni {
            if x + 1 < ni {
                interior_bonds.push((index_of(x, y), index_of(x + 1, y)));
            }
            if y + 1 < ni {
                interior_bonds.push((index_of(x, y), index_of(x, y + 1)));
            }
        }
    }
    let mut crossing_bonds = Vec::with_capacity(4 * n);
    for (t, &(bx, by)) in boundary.iter().enumerate() {
        let (ix, iy) = if by == -1 {
            (bx, 0)
        } else if by == ni {
            (bx, ni - 1)
        } else if bx == -1 {
            (0, by)
        } else {
            (ni - 1, by)
        };
        crossing_bonds.push((index_of(ix, iy), t));
    }
    Ok(SquareWindow {
        n,
        interior,
        boundary,
        interior_bonds,
        crossing_bonds,
    })
}

/// An interior spin assignment: bit `k` set means the spin at interior
/// site `k` is `+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InteriorConfig(pub u32);

impl InteriorConfig {
    pub fn spin(&self, k: usize) -> i8 {
        if self.0 >> k & 1 == 1 {
            1
        } else {
            -1
        }
    }
}

/// A boundary spin assignment: bit `t` set means the spin at boundary
/// site `t` is `+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryConfig(pub u32);

impl BoundaryConfig {
    pub fn spin(&self, t: usize) -> i8 {
        if self.0 >> t & 1 == 1 {
            1
        } else {
            -1
        }
    }

    pub fn flipped_at(&self, t: usize) -> Self {
        BoundaryConfig(self.0 ^ (1 << t))
    }
}

/// The field values on the interior sites of a window, in interior
/// site order.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowField(Vec<f64>);

impl WindowField {
    pub fn new(values: Vec<f64>, window: &SquareWindow) -> Result<Self> {
        if values.len() != window.interior.len() {
            return Err(Error::Parameter(format!(
                "window field must have {} entries, got {}",
                window.interior.len(),
                values.len()
            )));
        }
        Ok(WindowField(values))
    }

    /// Restriction of the staggered field to the window translated by
    /// `offset`.
    pub fn from_spec(window: &SquareWindow, spec: &FieldSpec, offset: (i64, i64)) -> Self {
        let values = window
            .interior
            .iter()
            .map(|&(x, y)| spec.value_at((offset.0 + i64::from(x), offset.1 + i64::from(y))))
            .collect();
        WindowField(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// Tabulated window energies.
///
/// For every interior configuration the interior energy
/// `E_int = -J sum(bond spins) - sum(field * spin)` is stored, together
/// with the spins adjacent to each boundary site packed as a bitmask.
/// The full conditional Hamiltonian decomposes as
/// `H(sigma | eta) = E_int(sigma) + sum_t eta(t) c_t(sigma)` with
/// `c_t(sigma) = -J * sigma(neighbour of t)`, which lets one interior
/// table serve all `2^(4n)` boundary configurations.
#[derive(Debug, Clone)]
pub struct EnergyTables {
    n: usize,
    j: f64,
    interior_count: usize,
    boundary_sites: usize,
    e_int: Vec<f64>,
    nbr_spin_mask: Vec<u32>,
}

/// Builds the energy tables for a window, field restriction, and
/// coupling.
pub fn build_energy_tables(window: &SquareWindow, field: &WindowField, j: f64) -> Result<EnergyTables> {
    if !j.is_finite() || j <= 0.0 {
        return Err(Error::Parameter(format!("coupling J must be finite and > 0, got {j}")));
    }
    let n2 = window.interior.len();
    let bsites = window.boundary.len();
    if field.values().len() != n2 {
        return Err(Error::Parameter(format!(
            "window field must have {} entries, got {}",
            n2,
            field.values().len()
        )));
    }
    if n2 > 25 || bsites > 24 {
        return Err(Error::Bound(format!(
            "enumeration bound exceeded: {n2} interior bits, {bsites} boundary bits"
        )));
    }
    let interior_count = 1usize << n2;
    let mut e_int = vec![0.0f64; interior_count];
    let mut nbr_spin_mask = vec![0u32; interior_count];
    let fvals = field.values();
    for (sigma, slot) in e_int.iter_mut().enumerate() {
        let cfg = InteriorConfig(sigma as u32);
        let mut e = 0.0;
        for &(a, b) in &window.interior_bonds {
            e -= j * f64::from(cfg.spin(a)) * f64::from(cfg.spin(b));
        }
        for (k, &f) in fvals.iter().enumerate() {
            e -= f * f64::from(cfg.spin(k));
        }
        *slot = e;
        let mut mask = 0u32;
        for &(k, t) in &window.crossing_bonds {
            if sigma >> k & 1 == 1 {
                mask |= 1 << t;
            }
        }
        nbr_spin_mask[sigma] = mask;
    }
    Ok(EnergyTables {
        n: window.n,
        j,
        interior_count,
        boundary_sites: bsites,
        e_int,
        nbr_spin_mask,
    })
}

impl EnergyTables {
    pub fn side(&self) -> usize {
        self.n
    }

    pub fn interior_bits(&self) -> usize {
        self.n * self.n
    }

    pub fn boundary_bits(&self) -> usize {
        self.boundary_sites
    }

    pub fn interior_energy(&self, sigma: InteriorConfig) -> f64 {
        self.e_int[sigma.0 as usize]
    }

    /// Coupling of boundary site `t` to its interior neighbour:
    /// `c_t(sigma) = -J * sigma(neighbour of t)`.
    pub fn boundary_coupling(&self, sigma: InteriorConfig, t: usize) -> f64 {
        if self.nbr_spin_mask[sigma.0 as usize] >> t & 1 == 1 {
            -self.j
        } else {
            self.j
        }
    }

    /// Full conditional Hamiltonian `H(sigma | eta)`.
    pub fn total_energy(&self, sigma: InteriorConfig, eta: BoundaryConfig) -> f64 {
        let k = self.boundary_sites as f64;
        let disagreements = (eta.0 ^ self.nbr_spin_mask[sigma.0 as usize]).count_ones() as f64;
        self.e_int[sigma.0 as usize] - self.j * (k - 2.0 * disagreements)
    }

    fn check_beta(beta: f64) -> Result<()> {
        if !beta.is_finite() || beta <= 0.0 {
            return Err(Error::Parameter(format!(
                "inverse temperature must be finite and > 0, got {beta}"
            )));
        }
        Ok(())
    }

    /// Probability of spin `+1` at every interior site under boundary
    /// condition `eta`.
    ///
    /// Boltzmann sums are shifted by the minimum energy before
    /// exponentiation, so the result stays finite for beta well past
    /// 500.
    pub fn marginals_plus(&self, eta: BoundaryConfig, beta: f64) -> Result<Vec<f64>> {
        Self::check_beta(beta)?;
        let n2 = self.interior_bits();
        let scaled: Vec<f64> = self.e_int.iter().map(|e| beta * e).collect();
        let mut activations = vec![0.0f64; self.interior_count];
        let mut row = vec![0.0f64; n2];
        self.marginal_row(&scaled, 2.0 * beta * self.j, eta.0 as usize, &mut activations, &mut row);
        Ok(row)
    }

    /// One row of the marginal table: fills `row[s] = mu(sigma(s) = +1 | eta)`.
    ///
    /// `scaled` must hold `beta * E_int` and `c2 = 2 * beta * J`;
    /// `activations` is scratch of length `interior_count`.
    fn marginal_row(&self, scaled: &[f64], c2: f64, eta: usize, activations: &mut [f64], row: &mut [f64]) {
        let mut a_min = f64::INFINITY;
        for (sigma, slot) in activations.iter_mut().enumerate() {
            let d = (eta as u32 ^ self.nbr_spin_mask[sigma]).count_ones() as f64;
            let a = scaled[sigma] + c2 * d;
            *slot = a;
            if a < a_min {
                a_min = a;
            }
        }
        row.fill(0.0);
        let mut z = 0.0;
        for (sigma, &a) in activations.iter().enumerate() {
            let da = a - a_min;
            if da > EXP_UNDERFLOW {
                continue;
            }
            let w = (-da).exp();
            z += w;
            let mut bits = sigma as u32;
            while bits != 0 {
                row[bits.trailing_zeros() as usize] += w;
                bits &= bits - 1;
            }
        }
        let inv_z = 1.0 / z;
        for v in row.iter_mut() {
            *v *= inv_z;
        }
    }

    /// Worst-case influence of each boundary spin on each interior
    /// marginal: entry `[s * 4n + t]` is the maximum over boundary
    /// configurations of `|mu(sigma(s)=+1 | eta) - mu(sigma(s)=+1 | eta
    /// flipped at t)|`.
    pub fn influence_matrix(&self, beta: f64) -> Result<Vec<f64>> {
        match self.influence_sweep(beta, f64::INFINITY)? {
            InfluenceSweep::Complete { matrix, .. } => Ok(matrix),
            InfluenceSweep::Aborted { .. } => unreachable!("sweep cannot abort with an infinite cap"),
        }
    }

    /// Sum over all `(s, t)` pairs of the influence matrix, aborting
    /// early once the partial sum is known to reach `cap`.
    ///
    /// Per-pair maxima only grow as more boundary configurations are
    /// processed, so an aborted sweep yields a valid lower bound.
    pub fn influence_sum(&self, beta: f64, cap: f64) -> Result<InfluenceSweep> {
        self.influence_sweep(beta, cap)
    }

    fn influence_sweep(&self, beta: f64, cap: f64) -> Result<InfluenceSweep> {
        Self::check_beta(beta)?;
        let n2 = self.interior_bits();
        let bsites = self.boundary_sites;
        let bcount = 1usize << bsites;
        let scaled: Vec<f64> = self.e_int.iter().map(|e| beta * e).collect();
        let c2 = 2.0 * beta * self.j;
        let mut activations = vec![0.0f64; self.interior_count];
        let mut table = vec![0.0f64; bcount * n2];
        let mut matrix = vec![0.0f64; n2 * bsites];
        const CHECK_EVERY: usize = 256;
        for eta in 0..bcount {
            let (head, tail) = table.split_at_mut(eta * n2);
            self.marginal_row(&scaled, c2, eta, &mut activations, &mut tail[..n2]);
            let row = &tail[..n2];
            // Fold against all previously computed partner rows.
            for t in 0..bsites {
                let partner = eta ^ (1 << t);
                if partner > eta {
                    continue;
                }
                let partner_row = &head[partner * n2..partner * n2 + n2];
                for s in 0..n2 {
                    let d = (row[s] - partner_row[s]).abs();
                    let slot = &mut matrix[s * bsites + t];
                    if d > *slot {
                        *slot = d;
                    }
                }
            }
            if cap.is_finite() && (eta + 1) % CHECK_EVERY == 0 {
                let partial: f64 = matrix.iter().sum();
                if partial >= cap {
                    return Ok(InfluenceSweep::Aborted { lower_bound: partial });
                }
            }
        }
        let sum = matrix.iter().sum();
        Ok(InfluenceSweep::Complete { matrix, sum })
    }
}

/// Outcome of an influence sweep.
#[derive(Debug, Clone)]
pub enum InfluenceSweep {
    Complete { matrix: Vec<f64>, sum: f64 },
    Aborted { lower_bound: f64 },
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Single-site conditional probability of `+1` given the sum of the
/// four neighbouring spins and the local field.
pub fn single_site_plus(j: f64, site_field: f64, eta_sum: i32, beta: f64) -> f64 {
    sigmoid(2.0 * beta * (j * f64::from(eta_sum) + site_field))
}

/// Total variation distance between the two single-site conditionals
/// with neighbour sums `eta_sum` and `eta_sum_prime`.
pub fn single_site_tv(j: f64, site_field: f64, eta_sum: i32, eta_sum_prime: i32, beta: f64) -> f64 {
    (single_site_plus(j, site_field, eta_sum, beta) - single_site_plus(j, site_field, eta_sum_prime, beta)).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::CellSize;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Direct summation of the window Hamiltonian, independent of the
    /// tabulated decomposition.
    fn direct_hamiltonian(
        window: &SquareWindow,
        field: &WindowField,
        j: f64,
        sigma: InteriorConfig,
        eta: BoundaryConfig,
    ) -> f64 {
        let mut e = 0.0;
        for &(a, b) in window.interior_bonds() {
            e -= j * f64::from(sigma.spin(a)) * f64::from(sigma.spin(b));
        }
        for &(k, t) in window.crossing_bonds() {
            e -= j * f64::from(sigma.spin(k)) * f64::from(eta.spin(t));
        }
        for (k, &f) in field.values().iter().enumerate() {
            e -= f * f64::from(sigma.spin(k));
        }
        e
    }

    /// Plain-exponential marginals, no shift, no tables.
    fn direct_marginals(
        window: &SquareWindow,
        field: &WindowField,
        j: f64,
        beta: f64,
        eta: BoundaryConfig,
    ) -> Vec<f64> {
        let n2 = window.interior_sites().len();
        let mut z = 0.0;
        let mut num = vec![0.0f64; n2];
        for sigma in 0..(1u32 << n2) {
            let cfg = InteriorConfig(sigma);
            let w = (-beta * direct_hamiltonian(window, field, j, cfg, eta)).exp();
            z += w;
            for (s, slot) in num.iter_mut().enumerate() {
                if cfg.spin(s) == 1 {
                    *slot += w;
                }
            }
        }
        num.into_iter().map(|v| v / z).collect()
    }

    fn uniform_field(window: &SquareWindow, h: f64) -> WindowField {
        WindowField::new(vec![h; window.interior_sites().len()], window).unwrap()
    }

    #[test]
    fn window_counts() {
        for (n, bonds) in [(1usize, 0usize), (2, 4), (3, 12), (4, 24), (5, 40)] {
            let w = build_window(n).unwrap();
            assert_eq!(w.interior_sites().len(), n * n);
            assert_eq!(w.boundary_sites().len(), 4 * n);
            assert_eq!(w.interior_bonds().len(), bonds);
            assert_eq!(w.crossing_bonds().len(), 4 * n);
        }
        assert!(build_window(0).is_err());
        assert!(build_window(6).is_err());
    }

    #[test]
    fn window_ordering_is_row_major_and_side_sorted() {
        let w = build_window(2).unwrap();
        assert_eq!(w.interior_sites(), &[(0, 0), (1, 0), (0, 1), (1, 1)]);
        assert_eq!(
            w.boundary_sites(),
            &[(0, -1), (1, -1), (0, 2), (1, 2), (-1, 0), (-1, 1), (2, 0), (2, 1)]
        );
    }

    #[test]
    fn every_boundary_site_has_exactly_one_crossing_bond() {
        for n in 1..=5 {
            let w = build_window(n).unwrap();
            let mut seen = vec![0usize; w.boundary_sites().len()];
            for &(k, t) in w.crossing_bonds() {
                seen[t] += 1;
                let (ix, iy) = w.interior_sites()[k];
                let (bx, by) = w.boundary_sites()[t];
                assert_eq!((ix - bx).abs() + (iy - by).abs(), 1, "crossing bond must join neighbours");
            }
            assert!(seen.iter().all(|&c| c == 1));
        }
    }

    #[test]
    fn single_site_tables() {
        let w = build_window(1).unwrap();
        let h = 0.8;
        let tables = build_energy_tables(&w, &uniform_field(&w, h), 1.0).unwrap();
        assert_eq!(tables.interior_energy(InteriorConfig(1)), -h);
        assert_eq!(tables.interior_energy(InteriorConfig(0)), h);
        for t in 0..4 {
            assert_eq!(tables.boundary_coupling(InteriorConfig(1), t), -1.0);
            assert_eq!(tables.boundary_coupling(InteriorConfig(0), t), 1.0);
        }
    }

    #[test]
    fn all_plus_interior_energy_n2() {
        let w = build_window(2).unwrap();
        let tables = build_energy_tables(&w, &uniform_field(&w, 0.0), 1.0).unwrap();
        assert_eq!(tables.interior_energy(InteriorConfig(0b1111)), -4.0);
    }

    #[test]
    fn table_energy_matches_direct_summation() {
        let w = build_window(3).unwrap();
        let spec = FieldSpec::new(CellSize::Finite(2), CellSize::Finite(1), 0.9).unwrap();
        let field = WindowField::from_spec(&w, &spec, (1, -2));
        let j = 1.3;
        let tables = build_energy_tables(&w, &field, j).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let sigma = InteriorConfig(rng.gen_range(0..1u32 << 9));
            let eta = BoundaryConfig(rng.gen_range(0..1u32 << 12));
            let direct = direct_hamiltonian(&w, &field, j, sigma, eta);
            let table = tables.total_energy(sigma, eta);
            assert!((direct - table).abs() < 1e-12, "{direct} vs {table}");
            // Same identity through the per-site couplings.
            let mut via_couplings = tables.interior_energy(sigma);
            for t in 0..12 {
                via_couplings += f64::from(eta.spin(t)) * tables.boundary_coupling(sigma, t);
            }
            assert!((direct - via_couplings).abs() < 1e-12);
        }
    }

    #[test]
    fn marginals_tend_to_half_at_infinite_temperature() {
        for n in 1..=3 {
            let w = build_window(n).unwrap();
            let tables = build_energy_tables(&w, &uniform_field(&w, 1.0), 1.0).unwrap();
            let m = tables.marginals_plus(BoundaryConfig(0b1010), 1e-12).unwrap();
            for p in m {
                assert!((p - 0.5).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn single_site_marginal_closed_form() {
        let w = build_window(1).unwrap();
        for h in [0.6, -0.6] {
            let tables = build_energy_tables(&w, &uniform_field(&w, h), 1.0).unwrap();
            for eta in 0u32..16 {
                let cfg = BoundaryConfig(eta);
                let m: i32 = (0..4).map(|t| i32::from(cfg.spin(t))).sum();
                let expected = single_site_plus(1.0, h, m, 0.7);
                let got = tables.marginals_plus(cfg, 0.7).unwrap()[0];
                assert!((got - expected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn marginals_match_direct_summation() {
        // All boundary configurations at two parameter points.
        for (j, h, beta) in [(1.0, 0.5, 1.0), (1.0, 2.0, 5.0)] {
            for n in 1..=2 {
                let w = build_window(n).unwrap();
                let spec = FieldSpec::new(CellSize::Finite(1), CellSize::Finite(1), h).unwrap();
                let field = WindowField::from_spec(&w, &spec, (0, 0));
                let tables = build_energy_tables(&w, &field, j).unwrap();
                for eta in 0..(1u32 << (4 * n)) {
                    let got = tables.marginals_plus(BoundaryConfig(eta), beta).unwrap();
                    let want = direct_marginals(&w, &field, j, beta, BoundaryConfig(eta));
                    for (g, w_) in got.iter().zip(&want) {
                        assert!((g - w_).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn plus_and_minus_marginals_sum_to_one() {
        let w = build_window(2).unwrap();
        let spec = FieldSpec::new(CellSize::Finite(2), CellSize::Finite(2), 1.1).unwrap();
        let field = WindowField::from_spec(&w, &spec, (1, 0));
        let tables = build_energy_tables(&w, &field, 1.0).unwrap();
        for eta in 0..(1u32 << 8) {
            let plus = tables.marginals_plus(BoundaryConfig(eta), 0.9).unwrap();
            // Independent minus-marginals by direct summation.
            let n2 = 4;
            let mut z = 0.0;
            let mut minus = vec![0.0f64; n2];
            for sigma in 0..(1u32 << n2) {
                let cfg = InteriorConfig(sigma);
                let w_ = (-0.9 * direct_hamiltonian(&w, &field, 1.0, cfg, BoundaryConfig(eta))).exp();
                z += w_;
                for (s, slot) in minus.iter_mut().enumerate() {
                    if cfg.spin(s) == -1 {
                        *slot += w_;
                    }
                }
            }
            for s in 0..n2 {
                assert!((plus[s] + minus[s] / z - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn spin_flip_covariance() {
        let w = build_window(2).unwrap();
        let spec = FieldSpec::new(CellSize::Finite(2), CellSize::Finite(1), 0.8).unwrap();
        let field = WindowField::from_spec(&w, &spec, (0, 0));
        let flipped = WindowField::new(field.values().iter().map(|v| -v).collect(), &w).unwrap();
        let tables = build_energy_tables(&w, &field, 1.0).unwrap();
        let tables_flipped = build_energy_tables(&w, &flipped, 1.0).unwrap();
        let full = (1u32 << 8) - 1;
        for eta in 0..(1u32 << 8) {
            let p = tables.marginals_plus(BoundaryConfig(eta), 1.2).unwrap();
            let q = tables_flipped.marginals_plus(BoundaryConfig(!eta & full), 1.2).unwrap();
            for (a, b) in p.iter().zip(&q) {
                assert!((a + b - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn marginals_stay_finite_at_beta_500() {
        let beta = 500.0;
        for n in 1..=2usize {
            let w = build_window(n).unwrap();
            let spec = FieldSpec::new(CellSize::Finite(1), CellSize::Finite(1), 2.0).unwrap();
            let field = WindowField::from_spec(&w, &spec, (0, 0));
            let tables = build_energy_tables(&w, &field, 1.0).unwrap();
            for eta in 0..(1u32 << (4 * n)) {
                for p in tables.marginals_plus(BoundaryConfig(eta), beta).unwrap() {
                    assert!(p.is_finite() && (0.0..=1.0).contains(&p));
                }
            }
        }
        let w = build_window(3).unwrap();
        let spec = FieldSpec::new(CellSize::Finite(2), CellSize::Finite(2), 4.5).unwrap();
        let field = WindowField::from_spec(&w, &spec, (1, 1));
        let tables = build_energy_tables(&w, &field, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..128 {
            let eta = BoundaryConfig(rng.gen_range(0..1u32 << 12));
            for p in tables.marginals_plus(eta, beta).unwrap() {
                assert!(p.is_finite() && (0.0..=1.0).contains(&p));
            }
        }
    }

    #[test]
    fn influence_matrix_matches_pairwise_maxima() {
        let w = build_window(2).unwrap();
        let spec = FieldSpec::new(CellSize::Finite(1), CellSize::Finite(1), 1.0).unwrap();
        let field = WindowField::from_spec(&w, &spec, (0, 0));
        let tables = build_energy_tables(&w, &field, 1.0).unwrap();
        let beta = 1.0;
        let matrix = tables.influence_matrix(beta).unwrap();
        for t in 0..8 {
            for s in 0..4 {
                let mut best: f64 = 0.0;
                for eta in 0..(1u32 << 8) {
                    if eta >> t & 1 == 1 {
                        continue;
                    }
                    let up = direct_marginals(&w, &field, 1.0, beta, BoundaryConfig(eta | 1 << t));
                    let down = direct_marginals(&w, &field, 1.0, beta, BoundaryConfig(eta));
                    best = best.max((up[s] - down[s]).abs());
                }
                assert!((matrix[s * 8 + t] - best).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn influence_sum_abort_gives_lower_bound() {
        let w = build_window(2).unwrap();
        let spec = FieldSpec::new(CellSize::Finite(1), CellSize::Finite(1), 0.5).unwrap();
        let field = WindowField::from_spec(&w, &spec, (0, 0));
        let tables = build_energy_tables(&w, &field, 1.0).unwrap();
        let beta = 8.0;
        let exact = match tables.influence_sum(beta, f64::INFINITY).unwrap() {
            InfluenceSweep::Complete { sum, .. } => sum,
            InfluenceSweep::Aborted { .. } => unreachable!(),
        };
        match tables.influence_sum(beta, exact / 2.0).unwrap() {
            InfluenceSweep::Aborted { lower_bound } => {
                assert!(lower_bound >= exact / 2.0);
                assert!(lower_bound <= exact + 1e-12);
            }
            InfluenceSweep::Complete { .. } => panic!("expected an aborted sweep"),
        }
    }

    #[test]
    fn single_site_tv_basics() {
        assert_eq!(single_site_tv(1.0, 0.5, 2, 2, 1.0), 0.0);
        assert!(single_site_tv(1.0, 0.5, 4, -4, 1e-12) < 1e-9);
        let direct = (single_site_plus(1.0, 0.7, 3, 0.9) - single_site_plus(1.0, 0.7, -1, 0.9)).abs();
        assert_eq!(single_site_tv(1.0, 0.7, 3, -1, 0.9), direct);
    }

    #[test]
    fn invalid_beta_is_rejected() {
        let w = build_window(1).unwrap();
        let tables = build_energy_tables(&w, &uniform_field(&w, 0.0), 1.0).unwrap();
        assert!(tables.marginals_plus(BoundaryConfig(0), f64::NAN).is_err());
        assert!(tables.marginals_plus(BoundaryConfig(0), f64::INFINITY).is_err());
        assert!(tables.marginals_plus(BoundaryConfig(0), 0.0).is_err());
    }
}

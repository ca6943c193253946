//! Mean-field molecular layers: one density matrix per grid cell, driven by
//! the local `Ex` through a nearest-neighbour dipole ladder.
//!
//! Matrix elements follow `ρ_ij = ⟨i|ρ|j⟩`, so for a free two-level system
//! `ρ_01(t) = ρ_01(0) exp(+i E1 t/ħ)`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::math;

/// Dense `N × N` density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix<const N: usize>(pub [[Complex64; N]; N]);

impl<const N: usize> DensityMatrix<N> {
    pub fn zero() -> Self {
        DensityMatrix([[Complex64::new(0.0, 0.0); N]; N])
    }

    /// All population in level 0.
    pub fn ground() -> Self {
        let mut m = Self::zero();
        m.0[0][0] = Complex64::new(1.0, 0.0);
        m
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) state vector.
    pub fn pure(psi: [Complex64; N]) -> Self {
        let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        let mut m = Self::zero();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = psi[i] * psi[j].conj() / norm;
            }
        }
        m
    }

    pub fn population(&self, level: usize) -> f64 {
        self.0[level][level].re
    }

    pub fn trace(&self) -> Complex64 {
        (0..N).map(|i| self.0[i][i]).sum()
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        let mut p = 0.0;
        for i in 0..N {
            for j in 0..N {
                p += (self.0[i][j] * self.0[j][i]).re;
            }
        }
        p
    }

    /// `max |ρ − ρ†|`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..N {
            for j in 0..N {
                worst = worst.max((self.0[i][j] - self.0[j][i].conj()).norm());
            }
        }
        worst
    }

    /// `ρ ← (ρ + ρ†)/2`.
    pub fn symmetrize(&mut self) {
        for i in 0..N {
            self.0[i][i].im = 0.0;
            for j in (i + 1)..N {
                let avg = (self.0[i][j] + self.0[j][i].conj()) * 0.5;
                self.0[i][j] = avg;
                self.0[j][i] = avg.conj();
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    fn axpy(&self, scale: f64, other: &Self) -> Self {
        let mut out = *self;
        for i in 0..N {
            for j in 0..N {
                out.0[i][j] += other.0[i][j] * scale;
            }
        }
        out
    }
}

/// Real symmetric Hamiltonian, J.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hamiltonian<const N: usize>(pub [[f64; N]; N]);

impl<const N: usize> Hamiltonian<N> {
    fn scaled(&self, factor: f64) -> Self {
        let mut out = *self;
        out.0.iter_mut().flatten().for_each(|h| *h *= factor);
        out
    }
}

/// `−i [H, ρ]` for real symmetric `H`. Multiply by `1/ħ` (or `dt/ħ`) to get
/// the Liouville rate.
#[inline]
fn liouvillian<const N: usize>(h: &Hamiltonian<N>, rho: &DensityMatrix<N>) -> DensityMatrix<N> {
    let mut out = DensityMatrix::<N>::zero();
    for i in 0..N {
        for j in 0..N {
            let mut c = Complex64::new(0.0, 0.0);
            for k in 0..N {
                c += rho.0[k][j] * h.0[i][k] - rho.0[i][k] * h.0[k][j];
            }
            // −i (a + ib) = b − ia
            out.0[i][j] = Complex64::new(c.im, -c.re);
        }
    }
    out
}

/// Level energies and the transition-dipole ladder of one molecular species.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelStructure<const N: usize> {
    /// Bare energies, J. Level 0 is conventionally at zero.
    pub energies: [f64; N],
    /// μ_x, C·m: real symmetric, zero diagonal, nonzero only between
    /// adjacent levels.
    pub dipole: [[f64; N]; N],
}

impl<const N: usize> LevelStructure<N> {
    /// Ladder with `couplings[k]` between levels `k` and `k + 1`.
    pub fn ladder(energies: [f64; N], couplings: &[f64]) -> Result<Self> {
        if N < 2 {
            return Err(Error::invalid("level_count", "need at least two levels"));
        }
        if couplings.len() != N - 1 {
            return Err(Error::LengthMismatch { expected: N - 1, found: couplings.len() });
        }
        if energies.iter().chain(couplings).any(|v| !v.is_finite()) {
            return Err(Error::invalid("levels", "energies and dipoles must be finite"));
        }
        let mut dipole = [[0.0; N]; N];
        for (k, &mu) in couplings.iter().enumerate() {
            dipole[k][k + 1] = mu;
            dipole[k + 1][k] = mu;
        }
        Ok(LevelStructure { energies, dipole })
    }

    /// `H = diag(E) + E_local μ_x`.
    pub fn hamiltonian(&self, e_local: f64) -> Hamiltonian<N> {
        let mut h = [[0.0; N]; N];
        for i in 0..N {
            for j in 0..N {
                h[i][j] = e_local * self.dipole[i][j];
            }
            h[i][i] += self.energies[i];
        }
        Hamiltonian(h)
    }

    /// Same ladder with every level shifted by `shift` (J).
    pub fn shifted(&self, shift: f64) -> Self {
        let mut out = *self;
        out.energies.iter_mut().for_each(|e| *e += shift);
        out
    }
}

/// Layer of identical molecules, one density matrix per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumLayer<const N: usize> {
    pub levels: LevelStructure<N>,
    /// n0, m⁻³.
    pub density: f64,
    /// Pure dephasing time τ_d, s.
    pub dephasing_time: Option<f64>,
    /// Grid cells covered by the layer (need not be contiguous).
    pub cells: Vec<usize>,
    pub rho: Vec<DensityMatrix<N>>,
}

impl<const N: usize> QuantumLayer<N> {
    /// Layer with every cell in the ground state.
    pub fn new(levels: LevelStructure<N>, density: f64, dephasing_time: Option<f64>, cells: Vec<usize>) -> Result<Self> {
        if !(density >= 0.0 && density.is_finite()) {
            return Err(Error::invalid("density", "must be non-negative"));
        }
        if let Some(t) = dephasing_time {
            if !(t > 0.0) {
                return Err(Error::invalid("dephasing_time", "must be positive"));
            }
        }
        let rho = vec![DensityMatrix::ground(); cells.len()];
        Ok(QuantumLayer { levels, density, dephasing_time, cells, rho })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn build_hamiltonian(&self, e_local: f64) -> Hamiltonian<N> {
        self.levels.hamiltonian(e_local)
    }

    /// Mean population of `level` over the layer's cells.
    pub fn mean_population(&self, level: usize) -> f64 {
        if self.rho.is_empty() {
            return 0.0;
        }
        self.rho.iter().map(|r| r.population(level)).sum::<f64>() / self.rho.len() as f64
    }

    /// One RK4 step of `dρ/dt = −(i/ħ)[H(E(t)), ρ]` per cell, with `H`
    /// evaluated at the step start, midpoint (twice) and end. Hermiticity is
    /// restored afterwards.
    pub fn propagate(&mut self, e_begin: &[f64], e_mid: &[f64], e_end: &[f64], dt: f64) -> Result<()> {
        let n = self.rho.len();
        for samples in [e_begin, e_mid, e_end] {
            if samples.len() != n {
                return Err(Error::LengthMismatch { expected: n, found: samples.len() });
            }
        }
        let scale = dt / HBAR;
        let levels = &self.levels;
        let step = |rho: &mut DensityMatrix<N>, (eb, em, ee): (f64, f64, f64)| -> Result<()> {
            if !(eb.is_finite() && em.is_finite() && ee.is_finite()) {
                return Err(Error::invalid("field", "non-finite field sample"));
            }
            let hb = levels.hamiltonian(eb).scaled(scale);
            let hm = levels.hamiltonian(em).scaled(scale);
            let he = levels.hamiltonian(ee).scaled(scale);
            let k1 = liouvillian(&hb, rho);
            let k2 = liouvillian(&hm, &rho.axpy(0.5, &k1));
            let k3 = liouvillian(&hm, &rho.axpy(0.5, &k2));
            let k4 = liouvillian(&he, &rho.axpy(1.0, &k3));
            for i in 0..N {
                for j in 0..N {
                    rho.0[i][j] += (k1.0[i][j] + (k2.0[i][j] + k3.0[i][j]) * 2.0 + k4.0[i][j]) / 6.0;
                }
            }
            rho.symmetrize();
            Ok(())
        };
        let fields = e_begin.iter().zip(e_mid).zip(e_end).map(|((&b, &m), &e)| (b, m, e));
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            let fields: Vec<_> = fields.collect();
            self.rho.par_iter_mut().zip(fields).try_for_each(|(rho, f)| step(rho, f))
        }
        #[cfg(not(feature = "parallel"))]
        {
            self.rho.iter_mut().zip(fields).try_for_each(|(rho, f)| step(rho, f))
        }
    }

    /// Multiply every coherence by `exp(−dt/τ_d)`. No-op without dephasing.
    pub fn apply_dephasing(&mut self, dt: f64) {
        let Some(tau) = self.dephasing_time else { return };
        let factor = math::exp(-dt / tau);
        for rho in &mut self.rho {
            for i in 0..N {
                for j in 0..N {
                    if i != j {
                        rho.0[i][j] *= factor;
                    }
                }
            }
        }
    }

    /// Polarization current per cell, A/m².
    ///
    /// With the coupling written as `+E μ_x`, the work done on the molecules
    /// is `n0 d⟨H0⟩/dt = −n0 E d⟨μ_x⟩/dt`, so the current that drains that
    /// energy from the field is `J = −n0 Tr(ρ̇ μ_x)`. `ρ̇` is the Liouville
    /// rate at `e_local` plus the dephasing rate `−ρ_ij/τ_d` on the
    /// coherences. The field part of the commutator has zero trace against
    /// `μ_x`, so only `H0` drives the current.
    pub fn polarization_current(&self, e_local: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.rho.len();
        if e_local.len() != n {
            return Err(Error::LengthMismatch { expected: n, found: e_local.len() });
        }
        if out.len() != n {
            return Err(Error::LengthMismatch { expected: n, found: out.len() });
        }
        let gamma = self.dephasing_time.map_or(0.0, |t| 1.0 / t);
        let mu = &self.levels.dipole;
        for ((rho, &e), j) in self.rho.iter().zip(e_local).zip(out.iter_mut()) {
            let h = self.levels.hamiltonian(e).scaled(1.0 / HBAR);
            let mut rate = liouvillian(&h, rho);
            for a in 0..N {
                for b in 0..N {
                    if a != b {
                        rate.0[a][b] -= rho.0[a][b] * gamma;
                    }
                }
            }
            let mut tr = Complex64::new(0.0, 0.0);
            let mut magnitude = 0.0;
            for a in 0..N {
                for b in 0..N {
                    let term = rate.0[a][b] * mu[b][a];
                    tr += term;
                    magnitude += term.norm();
                }
            }
            if magnitude > 0.0 && tr.im.abs() > 1e-10 * magnitude {
                return Err(Error::ImaginaryCurrent { residue: tr.im.abs() / magnitude });
            }
            *j = -self.density * tr.re;
        }
        Ok(())
    }

    /// Convenience wrapper returning a fresh vector.
    pub fn polarization_current_vec(&self, e_local: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.rho.len()];
        self.polarization_current(e_local, &mut out)?;
        Ok(out)
    }

    /// Dipole expectation `Tr(ρ μ_x)` per cell, C·m.
    pub fn dipole_moment(&self) -> Vec<f64> {
        let mu = &self.levels.dipole;
        self.rho
            .iter()
            .map(|rho| {
                let mut s = 0.0;
                for a in 0..N {
                    for b in 0..N {
                        s += (rho.0[a][b] * mu[b][a]).re;
                    }
                }
                s
            })
            .collect()
    }
}

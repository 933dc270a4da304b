//! Continuous-time linear USV model augmented with wave oscillators.
//!
//! State ordering is `x_usv = (eta_L, nu, x_wave_nu)` where
//! `eta_L = (x, y, z, roll, pitch, yaw)` lives in the vessel-parallel frame,
//! `nu = (u, v, w, p, q, r)` in the body frame, and `x_wave_nu` holds one
//! copy of the wave bank per velocity channel, in channel order `u..r`.
//! Each wave component contributes two states; its output is the second one.

use nalgebra::{DMatrix, Matrix2, Matrix6, RowVector2};

use crate::error::{invalid, CoreError, Result};
use crate::real::{lit, to_f64, Real};

/// Rigid-body pose/velocity block size.
pub const RIGID_STATES: usize = 12;
/// Number of body-velocity channels carrying a wave bank.
pub const CHANNELS: usize = 6;

pub const POSITION: std::ops::Range<usize> = 0..3;
pub const ORIENTATION: std::ops::Range<usize> = 3..6;
pub const LINEAR_VELOCITY: std::ops::Range<usize> = 6..9;
pub const ANGULAR_VELOCITY: std::ops::Range<usize> = 9..12;

/// `12 (1 + n_c)`.
pub const fn state_dim(n_c: usize) -> usize {
    RIGID_STATES * (1 + n_c)
}

/// Index of wave state `sub` (0 or 1) of component `component` on velocity `channel`.
pub const fn wave_state_index(n_c: usize, channel: usize, component: usize, sub: usize) -> usize {
    RIGID_STATES + channel * 2 * n_c + 2 * component + sub
}

/// Single damped oscillator: natural frequency and damping ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveComponentParams<T: Real> {
    pub omega0: T,
    pub lambda: T,
}

impl<T: Real> WaveComponentParams<T> {
    pub fn new(omega0: T, lambda: T) -> Result<Self> {
        let p = Self { omega0, lambda };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if !(self.omega0.is_finite() && self.omega0 > T::zero()) {
            return Err(invalid(format!("wave omega0 must be > 0, got {}", to_f64(self.omega0))));
        }
        if !(self.lambda.is_finite() && self.lambda >= T::zero()) {
            return Err(invalid(format!("wave lambda must be >= 0, got {}", to_f64(self.lambda))));
        }
        Ok(())
    }
}

/// Wave components shared by all six velocity channels.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WaveBank<T: Real> {
    pub components: Vec<WaveComponentParams<T>>,
}

impl<T: Real> WaveBank<T> {
    pub fn new(components: Vec<WaveComponentParams<T>>) -> Result<Self> {
        for c in &components {
            c.validate()?;
        }
        Ok(Self { components })
    }

    pub fn empty() -> Self {
        Self { components: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

/// Inertia, added mass, linear damping and restoring matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidBodyParams<T: Real> {
    pub inertia: Matrix6<T>,
    pub added_mass: Matrix6<T>,
    pub damping: Matrix6<T>,
    pub restoring: Matrix6<T>,
}

impl<T: Real> RigidBodyParams<T> {
    /// Diagonal parameterization, one entry per axis `(x, y, z, roll, pitch, yaw)`.
    pub fn diagonal(inertia: [T; 6], added_mass: [T; 6], damping: [T; 6], restoring: [T; 6]) -> Self {
        let diag = |a: [T; 6]| Matrix6::from_diagonal(&nalgebra::Vector6::from_row_slice(&a));
        Self {
            inertia: diag(inertia),
            added_mass: diag(added_mass),
            damping: diag(damping),
            restoring: diag(restoring),
        }
    }

    pub fn total_mass(&self) -> Matrix6<T> {
        self.inertia + self.added_mass
    }

    /// `(M^-1 D, M^-1 G)`.
    pub fn normalized(&self) -> Result<(Matrix6<T>, Matrix6<T>)> {
        let m = self.total_mass();
        let m_inv = m.try_inverse().ok_or_else(|| {
            CoreError::SingularMatrix("total mass M = inertia + added_mass is not invertible".into())
        })?;
        if m_inv.iter().any(|x| !x.is_finite()) {
            return Err(CoreError::SingularMatrix(
                "total mass M = inertia + added_mass is numerically singular".into(),
            ));
        }
        Ok((m_inv * self.damping, m_inv * self.restoring))
    }
}

/// `A_omega = [[0, 1], [-omega0^2, -2 lambda omega0]]`, `C_omega = [0, 1]`.
pub fn wave_component_matrices<T: Real>(params: &WaveComponentParams<T>) -> Result<(Matrix2<T>, RowVector2<T>)> {
    params.validate()?;
    let w = params.omega0;
    let a = Matrix2::new(T::zero(), T::one(), -w * w, -lit::<T>(2.0) * params.lambda * w);
    Ok((a, RowVector2::new(T::zero(), T::one())))
}

/// Block-diagonal `A_wave` (2N_c x 2N_c) and concatenated `C_wave` (1 x 2N_c).
pub fn assemble_wave_bank<T: Real>(bank: &WaveBank<T>) -> Result<(DMatrix<T>, DMatrix<T>)> {
    if bank.is_empty() {
        return Err(invalid("wave bank must contain at least one component"));
    }
    let n = 2 * bank.len();
    let mut a = DMatrix::zeros(n, n);
    let mut c = DMatrix::zeros(1, n);
    for (i, comp) in bank.components.iter().enumerate() {
        let (ai, ci) = wave_component_matrices(comp)?;
        a.fixed_view_mut::<2, 2>(2 * i, 2 * i).copy_from(&ai);
        c.fixed_view_mut::<1, 2>(0, 2 * i).copy_from(&ci);
    }
    Ok((a, c))
}

/// Six copies of the bank: `A_wave_nu` (12N_c square) and `C_wave_nu` (6 x 12N_c).
pub fn assemble_wave_nu<T: Real>(bank: &WaveBank<T>) -> Result<(DMatrix<T>, DMatrix<T>)> {
    let (a_wave, c_wave) = assemble_wave_bank(bank)?;
    let block = a_wave.nrows();
    let mut a = DMatrix::zeros(CHANNELS * block, CHANNELS * block);
    let mut c = DMatrix::zeros(CHANNELS, CHANNELS * block);
    for ch in 0..CHANNELS {
        a.view_mut((ch * block, ch * block), (block, block)).copy_from(&a_wave);
        c.view_mut((ch, ch * block), (1, block)).copy_from(&c_wave);
    }
    Ok((a, c))
}

/// Continuous-time system matrix `A_usv` together with the parameters it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousModel<T: Real> {
    a: DMatrix<T>,
    rigid: RigidBodyParams<T>,
    bank: WaveBank<T>,
}

impl<T: Real> ContinuousModel<T> {
    pub fn matrix(&self) -> &DMatrix<T> {
        &self.a
    }

    pub fn n_c(&self) -> usize {
        self.bank.len()
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn rigid(&self) -> &RigidBodyParams<T> {
        &self.rigid
    }

    pub fn bank(&self) -> &WaveBank<T> {
        &self.bank
    }

    /// Wraps an arbitrary square matrix; used by tests and for linear toy systems.
    pub fn from_matrix(a: DMatrix<T>, rigid: RigidBodyParams<T>, bank: WaveBank<T>) -> Result<Self> {
        if !a.is_square() || a.nrows() != state_dim(bank.len()) {
            return Err(invalid(format!(
                "model matrix must be {n}x{n} for N_c = {}",
                bank.len(),
                n = state_dim(bank.len())
            )));
        }
        Ok(Self { a, rigid, bank })
    }
}

/// Assembles
/// ```text
/// A_usv = [ 0        I        0          ]
///         [ -M^-1 G  -M^-1 D  C_wave_nu  ]
///         [ 0        0        A_wave_nu  ]
/// ```
/// An empty bank yields the 12x12 wave-free model.
pub fn assemble_usv_model<T: Real>(rigid: &RigidBodyParams<T>, bank: &WaveBank<T>) -> Result<ContinuousModel<T>> {
    let (md, mg) = rigid.normalized()?;
    let n = state_dim(bank.len());
    let mut a = DMatrix::zeros(n, n);
    a.view_mut((0, 6), (6, 6)).fill_with_identity();
    a.view_mut((6, 0), (6, 6)).copy_from(&(-mg));
    a.view_mut((6, 6), (6, 6)).copy_from(&(-md));
    if !bank.is_empty() {
        let (a_wave, c_wave) = assemble_wave_nu(bank)?;
        let w = a_wave.nrows();
        a.view_mut((6, RIGID_STATES), (6, w)).copy_from(&c_wave);
        a.view_mut((RIGID_STATES, RIGID_STATES), (w, w)).copy_from(&a_wave);
    }
    Ok(ContinuousModel {
        a,
        rigid: rigid.clone(),
        bank: bank.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::{Complex, DVector};
    use proptest::prelude::*;

    fn params(omega0: f64, lambda: f64) -> WaveComponentParams<f64> {
        WaveComponentParams::new(omega0, lambda).unwrap()
    }

    fn rigid() -> RigidBodyParams<f64> {
        RigidBodyParams::diagonal(
            [200.0, 200.0, 200.0, 40.0, 60.0, 80.0],
            [20.0, 40.0, 100.0, 5.0, 10.0, 10.0],
            [60.0, 120.0, 300.0, 40.0, 60.0, 80.0],
            [0.0, 0.0, 3000.0, 300.0, 500.0, 0.0],
        )
    }

    #[test]
    fn component_matrices_read_from_definition() {
        let (a, c) = wave_component_matrices(&params(1.0, 0.0)).unwrap();
        assert_eq!(a, Matrix2::new(0.0, 1.0, -1.0, 0.0));
        assert_eq!(c, RowVector2::new(0.0, 1.0));
        let (a, _) = wave_component_matrices(&params(2.0, 0.5)).unwrap();
        assert_eq!(a, Matrix2::new(0.0, 1.0, -4.0, -2.0));
    }

    #[test]
    fn undamped_component_has_imaginary_eigenvalues() {
        let w0 = 1.7;
        let (a, _) = wave_component_matrices(&params(w0, 0.0)).unwrap();
        // roots of s^2 + w0^2
        let mut eig: Vec<Complex<f64>> = a.complex_eigenvalues().iter().copied().collect();
        eig.sort_by(|x, y| x.im.partial_cmp(&y.im).unwrap());
        assert_relative_eq!(eig[0].re, 0.0, epsilon = 1e-12);
        assert_relative_eq!(eig[0].im, -w0, epsilon = 1e-12);
        assert_relative_eq!(eig[1].im, w0, epsilon = 1e-12);
    }

    #[test]
    fn invalid_component_parameters() {
        assert!(WaveComponentParams::new(0.0, 0.1).is_err());
        assert!(WaveComponentParams::new(-1.0, 0.1).is_err());
        assert!(WaveComponentParams::new(1.0, -0.1).is_err());
        let bad = WaveComponentParams { omega0: 0.0, lambda: 0.0 };
        assert!(wave_component_matrices(&bad).is_err());
    }

    #[test]
    fn single_component_bank_matches_component() {
        let p = params(1.3, 0.2);
        let (a, c) = assemble_wave_bank(&WaveBank::new(vec![p]).unwrap()).unwrap();
        let (ai, ci) = wave_component_matrices(&p).unwrap();
        assert_eq!(a.fixed_view::<2, 2>(0, 0), ai);
        assert_eq!(c.fixed_view::<1, 2>(0, 0), ci);
    }

    #[test]
    fn two_component_bank_is_block_diagonal() {
        let bank = WaveBank::new(vec![params(1.0, 0.0), params(2.0, 0.1)]).unwrap();
        let (a, c) = assemble_wave_bank(&bank).unwrap();
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[0.0, 1.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, -4.0, -0.4],
        );
        assert_relative_eq!(a, expected, epsilon = 1e-15);
        assert_eq!(c, DMatrix::from_row_slice(1, 4, &[0.0, 1.0, 0.0, 1.0]));
    }

    #[test]
    fn empty_bank_is_rejected_below_model_level() {
        assert!(assemble_wave_bank(&WaveBank::<f64>::empty()).is_err());
        assert!(assemble_wave_nu(&WaveBank::<f64>::empty()).is_err());
    }

    #[test]
    fn wave_nu_replicates_bank() {
        let bank = WaveBank::new(vec![params(1.0, 0.0)]).unwrap();
        let (a, c) = assemble_wave_nu(&bank).unwrap();
        assert_eq!(a.shape(), (12, 12));
        for ch in 0..6 {
            for i in 0..12 {
                for j in 0..12 {
                    let expected = match (i as isize - 2 * ch as isize, j as isize - 2 * ch as isize) {
                        (0, 1) => 1.0,
                        (1, 0) => -1.0,
                        _ => 0.0,
                    };
                    if i / 2 == ch {
                        assert_eq!(a[(i, j)], expected);
                    }
                }
            }
        }
        let out = &c * DVector::zeros(12);
        assert_eq!(out, DVector::zeros(6));
    }

    #[test]
    fn wave_nu_rows_sum_to_component_count() {
        let bank = WaveBank::new(vec![params(0.5, 0.0), params(1.0, 0.1), params(1.5, 0.2)]).unwrap();
        let (_, c) = assemble_wave_nu(&bank).unwrap();
        for row in c.row_iter() {
            assert_eq!(row.sum(), 3.0);
        }
        // channel i only reads its own block
        for ch in 0..6 {
            let block = 2 * bank.len();
            for j in 0..c.ncols() {
                if j / block != ch {
                    assert_eq!(c[(ch, j)], 0.0);
                }
            }
        }
    }

    #[test]
    fn wave_free_model_is_rigid_body_block() {
        let r = rigid();
        let m = assemble_usv_model(&r, &WaveBank::empty()).unwrap();
        assert_eq!(m.dim(), 12);
        let (md, mg) = r.normalized().unwrap();
        let a = m.matrix();
        assert_eq!(a.view((0, 0), (6, 6)), DMatrix::<f64>::zeros(6, 6));
        assert_eq!(a.view((0, 6), (6, 6)), DMatrix::<f64>::identity(6, 6));
        assert_relative_eq!(a.view((6, 0), (6, 6)).clone_owned(), DMatrix::from_iterator(6, 6, (-mg).iter().copied()));
        assert_relative_eq!(a.view((6, 6), (6, 6)).clone_owned(), DMatrix::from_iterator(6, 6, (-md).iter().copied()));
    }

    #[test]
    fn singular_mass_is_reported() {
        let mut r = rigid();
        r.inertia[(2, 2)] = 0.0;
        r.added_mass[(2, 2)] = 0.0;
        match assemble_usv_model(&r, &WaveBank::empty()) {
            Err(CoreError::SingularMatrix(msg)) => assert!(msg.contains("added_mass")),
            other => panic!("expected singular matrix error, got {other:?}"),
        }
    }

    #[test]
    fn diagonal_rigid_eigenvalues_match_per_axis_quadratics() {
        let r = rigid();
        let m = assemble_usv_model(&r, &WaveBank::empty()).unwrap();
        let eig: Vec<Complex<f64>> = m.matrix().complex_eigenvalues().iter().copied().collect();
        for axis in 0..6 {
            let mass = r.inertia[(axis, axis)] + r.added_mass[(axis, axis)];
            let d = r.damping[(axis, axis)];
            let g = r.restoring[(axis, axis)];
            // m s^2 + d s + g = 0
            let disc = Complex::new(d * d - 4.0 * mass * g, 0.0).sqrt();
            for root in [(-d + disc) / (2.0 * mass), (-d - disc) / (2.0 * mass)] {
                let found = eig.iter().any(|e| (e - root).norm() < 1e-9);
                assert!(found, "axis {axis}: root {root} missing from {eig:?}");
            }
        }
    }

    #[test]
    fn model_accessors_and_from_matrix() {
        let bank = WaveBank::new(vec![params(1.0, 0.1), params(2.0, 0.1)]).unwrap();
        let m = assemble_usv_model(&rigid(), &bank).unwrap();
        assert_eq!(m.n_c(), 2);
        assert_eq!(m.dim(), 36);
        assert!(ContinuousModel::from_matrix(DMatrix::zeros(3, 3), rigid(), bank.clone()).is_err());
        assert!(ContinuousModel::from_matrix(DMatrix::zeros(36, 36), rigid(), bank).is_ok());
    }

    #[test]
    fn wave_injection_lands_on_velocity_rows() {
        let bank = WaveBank::new(vec![params(1.0, 0.1), params(2.0, 0.1)]).unwrap();
        let m = assemble_usv_model(&rigid(), &bank).unwrap();
        let a = m.matrix();
        for ch in 0..6 {
            for comp in 0..2 {
                assert_eq!(a[(6 + ch, wave_state_index(2, ch, comp, 1))], 1.0);
                assert_eq!(a[(6 + ch, wave_state_index(2, ch, comp, 0))], 0.0);
            }
        }
    }

    proptest! {
        #[test]
        fn block_layout_holds_for_random_parameters(
            n_c in 0usize..4,
            masses in proptest::collection::vec(1.0..500.0f64, 6),
            damp in proptest::collection::vec(0.0..200.0f64, 6),
            rest in proptest::collection::vec(0.0..3000.0f64, 6),
            omegas in proptest::collection::vec((0.1..3.0f64, 0.0..0.5f64), 4),
        ) {
            let arr = |v: &[f64]| [v[0], v[1], v[2], v[3], v[4], v[5]];
            let r = RigidBodyParams::diagonal(arr(&masses), [0.0; 6], arr(&damp), arr(&rest));
            let bank = WaveBank::new(omegas[..n_c].iter().map(|&(w, l)| params(w, l)).collect()).unwrap();
            let m = assemble_usv_model(&r, &bank).unwrap();
            let a = m.matrix();
            let n = state_dim(n_c);
            prop_assert_eq!(a.shape(), (n, n));
            // top row band: only the identity block is non-zero
            for i in 0..6 {
                for j in 0..n {
                    let expected = if j == i + 6 { 1.0 } else { 0.0 };
                    prop_assert_eq!(a[(i, j)], expected);
                }
            }
            // wave rows never read rigid states
            for i in RIGID_STATES..n {
                for j in 0..RIGID_STATES {
                    prop_assert_eq!(a[(i, j)], 0.0);
                }
            }
            // wave blocks of different channels never couple
            let block = 2 * n_c;
            for i in RIGID_STATES..n {
                for j in RIGID_STATES..n {
                    if (i - RIGID_STATES) / block.max(1) != (j - RIGID_STATES) / block.max(1) {
                        prop_assert_eq!(a[(i, j)], 0.0);
                    }
                }
            }
        }
    }
}

use nalgebra::{DMatrix, DVector};

use super::scenario::{sphere_frame, EvolutionPoint, Scenario, ScenarioKind};
use crate::error::Result;

/// Relative singular-value threshold for the kernel.
pub const KERNEL_RTOL: f64 = 1e-10;
/// Absolute floor on the largest singular value.
pub const KERNEL_FLOOR: f64 = 1e-300;

/// Chart indices of the evolution-space coordinates of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub d: usize,
    pub x: usize,
    pub v: usize,
    pub s: usize,
    /// Indices of `(w, z)`.
    pub fiber: Option<(usize, usize)>,
    /// Indices of the two sphere-chart coordinates.
    pub spin: Option<(usize, usize)>,
    pub dim: usize,
}

impl Layout {
    pub fn of(kind: ScenarioKind) -> Self {
        let d = kind.spatial_dim();
        let s = 2 * d;
        let fiber = kind.is_planar().then_some((s + 1, s + 2));
        let spin = kind.has_spin().then_some((s + 1, s + 2));
        Self {
            d,
            x: 0,
            v: d,
            s,
            fiber,
            spin,
            dim: kind.chart_dim(),
        }
    }
}

fn put(sig: &mut DMatrix<f64>, i: usize, j: usize, val: f64) {
    sig[(i, j)] += val;
    sig[(j, i)] -= val;
}

/// Effective mass squared `m^2 + 4 (q1 - qB/2) q2`.
pub fn effective_mass_sq(m: f64, q1: f64, q2: f64, qb: f64) -> f64 {
    m * m + 4.0 * (q1 - 0.5 * qb) * q2
}

/// The presymplectic 2-form as a skew matrix, `sigma(X, Y) = X^T S Y`, in the
/// chart `(x, v, s[, w, z][, a, b])` where `(a, b)` are components of `du` in
/// the tangent frame of [`sphere_frame`].
pub fn sigma_matrix(y: &EvolutionPoint, scenario: &Scenario) -> Result<DMatrix<f64>> {
    y.check_layout(scenario)?;
    let kind = scenario.kind();
    let lay = Layout::of(kind);
    let pr = scenario.params();
    let d = lay.d;
    let mut sig = DMatrix::zeros(lay.dim, lay.dim);

    // m dv.dx
    for i in 0..d {
        put(&mut sig, lay.v + i, lay.x + i, pr.m);
    }
    let (e, b) = scenario.fields_at(y.x(), y.s());
    // q <E, dx> ^ ds
    for i in 0..d {
        put(&mut sig, lay.x + i, lay.s, pr.q * e[i]);
    }

    if kind.is_planar() {
        let bz = if kind.has_field() { b[0] } else { 0.0 };
        // -(q1 - qB/2) eps_ij dx^i dx^j + q2 eps_ij dv^i dv^j
        put(&mut sig, lay.x, lay.x + 1, -2.0 * (pr.q1 - 0.5 * pr.q * bz));
        put(&mut sig, lay.v, lay.v + 1, 2.0 * pr.q2);
        if let Some(f) = scenario.field() {
            // mu theta dB ^ ds
            let gb = f.grad_b(y.x(), y.s());
            for i in 0..d {
                put(&mut sig, lay.x + i, lay.s, pr.mu * pr.theta * gb[(0, i)]);
            }
        }
    } else {
        // q B^i eps_ijk dx^j dx^k / 2
        if kind.has_field() {
            put(&mut sig, lay.x + 1, lay.x + 2, pr.q * b[0]);
            put(&mut sig, lay.x + 2, lay.x, pr.q * b[1]);
            put(&mut sig, lay.x, lay.x + 1, pr.q * b[2]);
        }
        if let (Some((ia, ib)), Some(u)) = (lay.spin, y.u()) {
            // -spin <u, du x du'>
            put(&mut sig, ia, ib, -pr.spin);
            if let Some(f) = scenario.field() {
                // mu d<u, B> ^ ds
                let (e1, e2) = sphere_frame(u);
                let gb = f.grad_b(y.x(), y.s());
                let grad_ub = gb.transpose() * u;
                for i in 0..d {
                    put(&mut sig, lay.x + i, lay.s, pr.mu * grad_ub[i]);
                }
                put(&mut sig, ia, lay.s, pr.mu * e1.dot(&b));
                put(&mut sig, ib, lay.s, pr.mu * e2.dot(&b));
            }
        }
    }
    Ok(sig)
}

/// Orthonormal basis of the null space, as columns.
///
/// Singular values below `tol * max(sigma_max, KERNEL_FLOOR)` count as zero.
pub fn kernel_basis(sigma: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = sigma.ncols();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let svd = sigma.clone().svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.max().max(KERNEL_FLOOR);
    let cut = tol * smax;
    // thin SVD of a square matrix keeps all n singular vectors
    let cols: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &sv)| sv < cut)
        .map(|(k, _)| vt.row(k).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Kernel dimension of `sigma_matrix` at `y` with the default tolerance.
pub fn kernel_dim(y: &EvolutionPoint, scenario: &Scenario) -> Result<usize> {
    Ok(kernel_basis(&sigma_matrix(y, scenario)?, KERNEL_RTOL).ncols())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::FieldSpec;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn planar_point() -> EvolutionPoint {
        EvolutionPoint::planar(v(&[0.2, -0.4]), v(&[1.0, 0.3]), 0.5, 0.1, -0.2)
    }

    #[test]
    fn effective_mass_examples() {
        assert_eq!(effective_mass_sq(1.0, 0.0, 0.0, 0.0), 1.0);
        assert_eq!(effective_mass_sq(0.0, 1.0, 1.0, 0.0), 4.0);
        assert_eq!(effective_mass_sq(1.0, 1.0, 1.0, 4.0), -3.0);
    }

    #[test]
    fn free_planar_kernel_dimensions() {
        let y = planar_point();
        let sc = Scenario::free_2d_ext(1.0, 0.3, 0.4, 0.0).unwrap();
        assert_eq!(kernel_dim(&y, &sc).unwrap(), 3);
        // m^2 + 4 q1 q2 = 1 - 1 = 0
        let sc = Scenario::free_2d_ext(1.0, 0.5, -0.5, 0.0).unwrap();
        assert_eq!(kernel_dim(&y, &sc).unwrap(), 5);
        let sc = Scenario::free_2d_ext(0.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(sigma_matrix(&y, &sc).unwrap(), DMatrix::zeros(7, 7));
        assert_eq!(kernel_dim(&y, &sc).unwrap(), 7);
    }

    #[test]
    fn free_spatial_rank() {
        let y = EvolutionPoint::spatial(v(&[1., 2., 3.]), v(&[0., 1., 0.]), 0.0);
        let sc = Scenario::free_3d(2.0).unwrap();
        let sig = sigma_matrix(&y, &sc).unwrap();
        assert_eq!(sig.rank(1e-12), 6);
        let ker = kernel_basis(&sig, KERNEL_RTOL);
        assert_eq!(ker.ncols(), 1);
        assert!((ker[(6, 0)].abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fields_off_reduce_to_free() {
        let y = planar_point();
        let free = Scenario::free_2d_ext(1.3, 0.2, -0.7, 0.4).unwrap();
        let em = Scenario::em_2d_ext(
            1.3,
            0.9,
            0.6,
            0.2,
            -0.7,
            0.4,
            FieldSpec::uniform(vec![0., 0.], vec![0.]),
        )
        .unwrap();
        assert_eq!(sigma_matrix(&y, &free).unwrap(), sigma_matrix(&y, &em).unwrap());
    }

    #[test]
    fn sigma_is_exactly_antisymmetric() {
        let f = FieldSpec::linear(
            vec![0.3, -0.2, 1.1],
            DMatrix::from_row_slice(3, 3, &[0.1, 0.2, 0.0, 0.2, -0.3, 0.4, 0.0, 0.4, 0.5]),
            vec![0.7, 0.1, -0.4],
            DMatrix::from_row_slice(3, 3, &[0.0, 0.3, -0.2, 0.3, 0.1, 0.0, -0.2, 0.0, 0.2]),
        );
        let sc = Scenario::em_3d_spin(1.2, 0.8, 0.5, 0.9, f).unwrap();
        let u = v(&[0.36, 0.48, 0.8]);
        let y = EvolutionPoint::with_spin(v(&[0.1, 0.2, 0.3]), v(&[1., 0., 0.]), 0.0, u).unwrap();
        let sig = sigma_matrix(&y, &sc).unwrap();
        assert_eq!(&sig + sig.transpose(), DMatrix::zeros(9, 9));
        assert_eq!(kernel_basis(&sig, KERNEL_RTOL).ncols(), 1);
    }
}

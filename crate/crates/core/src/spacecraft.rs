//! Rigid spacecraft attitude stabilisation with the vector integral sliding
//! surface and the matrix-gain disturbance observer.
//!
//! ```text
//! q0'  = -1/2 qv^T W
//! qv'  =  1/2 (q0 I + qv^x) W
//! J W' = -W^x J W + u + d
//!
//! e    = W + kv qv
//! s    = e - e0 + int sig(e)^{1/2}
//! u    = W^x J W - 1/2 kv J (q0 I - qv^x) W - J sig(e)^{1/2} - J Theta s
//! ```

use crate::linalg::{
    add, cross, diag, dot, inverse, is_symmetric, lambda_max, lambda_min, leading_minors_positive, mat_mul, mat_vec,
    norm, scale, scaled_identity, sub, symmetric_part, Mat3, Vec3,
};
use crate::numerics::{sgn_i8, spow};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    pub q0: f64,
    pub qv: Vec3,
}

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion { q0: 1.0, qv: [0.0; 3] };

    pub fn new(q0: f64, qv: Vec3) -> Self {
        Self { q0, qv }
    }

    /// Unit quaternion with the given vector part and nonnegative scalar part.
    pub fn from_vector_part(qv: Vec3) -> Result<Self> {
        let rest = 1.0 - dot(qv, qv);
        if !(rest >= 0.0) {
            return Err(Error::Domain("quaternion vector part exceeds unit norm"));
        }
        Ok(Self { q0: libm::sqrt(rest), qv })
    }

    pub fn norm_squared(&self) -> f64 {
        self.q0 * self.q0 + dot(self.qv, self.qv)
    }

    /// `|q0^2 + qv^T qv - 1|`.
    pub fn norm_error(&self) -> f64 {
        (self.norm_squared() - 1.0).abs()
    }

    pub fn normalized(&self) -> Self {
        let n = libm::sqrt(self.norm_squared());
        Self {
            q0: self.q0 / n,
            qv: scale(1.0 / n, self.qv),
        }
    }
}

/// Inertia `J` with its inverse cached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidBody {
    inertia: Mat3,
    inertia_inv: Mat3,
}

impl RigidBody {
    pub fn new(inertia: Mat3) -> Result<Self> {
        if !is_symmetric(&inertia, 1e-12) {
            return Err(Error::InvalidGains("inertia must be symmetric"));
        }
        if !leading_minors_positive(&inertia) {
            return Err(Error::InvalidGains("inertia must be positive definite"));
        }
        let inertia_inv = inverse(&inertia).ok_or(Error::InvalidGains("inertia is singular"))?;
        Ok(Self { inertia, inertia_inv })
    }

    pub fn inertia(&self) -> &Mat3 {
        &self.inertia
    }

    pub fn inertia_inv(&self) -> &Mat3 {
        &self.inertia_inv
    }

    /// `W^x J W`.
    pub fn gyroscopic(&self, omega: Vec3) -> Vec3 {
        cross(omega, mat_vec(&self.inertia, omega))
    }
}

impl Default for RigidBody {
    /// `J = [[20, 0, 0.9], [0, 17, 0], [0.9, 0, 15]]` kg m^2.
    fn default() -> Self {
        Self::new([[20.0, 0.0, 0.9], [0.0, 17.0, 0.0], [0.9, 0.0, 15.0]]).expect("default inertia is SPD")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScGains {
    pub kv: f64,
    pub theta: Mat3,
    pub lambda: Mat3,
    pub mu: Mat3,
    /// Diagonal of `tau`.
    pub tau: Vec3,
    /// `e` at the initial time.
    pub e0: Vec3,
}

impl ScGains {
    pub fn new(kv: f64, theta: Mat3, lambda: Mat3, mu: Mat3, tau: Vec3) -> Result<Self> {
        if !(kv > 0.0) {
            return Err(Error::InvalidGains("kv must be positive"));
        }
        for m in [&theta, &lambda, &mu] {
            if !is_symmetric(m, 1e-12) || !leading_minors_positive(m) {
                return Err(Error::InvalidGains("Theta, Lambda and mu must be symmetric positive definite"));
            }
        }
        if tau.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::InvalidGains("tau must have a positive diagonal"));
        }
        Ok(Self {
            kv,
            theta,
            lambda,
            mu,
            tau,
            e0: [0.0; 3],
        })
    }

    /// Checks that `Theta - lambda_max(mu)/2 I` and `Lambda J^-1 - I/2` are
    /// positive definite and that `tau - (lambda_max(mu) + 1) I` is positive.
    pub fn validate_with(&self, body: &RigidBody) -> Result<()> {
        let mu_max = lambda_max(&self.mu);
        if !(lambda_min(&self.theta) > 0.5 * mu_max) {
            return Err(Error::InvalidGains("lambda_min(Theta) must exceed lambda_max(mu) / 2"));
        }
        if !(lambda_min(&self.lambda_j_inv(body)) > 0.5) {
            return Err(Error::InvalidGains("lambda_min(Lambda J^-1) must exceed 1/2"));
        }
        if self.tau.iter().any(|&t| !(t - mu_max - 1.0 > 0.0)) {
            return Err(Error::InvalidGains("tau must exceed lambda_max(mu) + 1"));
        }
        Ok(())
    }

    /// Symmetric part of `Lambda J^-1`.
    fn lambda_j_inv(&self, body: &RigidBody) -> Mat3 {
        symmetric_part(&mat_mul(&self.lambda, body.inertia_inv()))
    }

    pub fn with_initial_error(mut self, e0: Vec3) -> Self {
        self.e0 = e0;
        self
    }
}

impl Default for ScGains {
    /// `Theta = 2I`, `Lambda = 50I`, `mu = 2I`, `tau = 5I`, `kv = 1`.
    fn default() -> Self {
        Self::new(
            1.0,
            scaled_identity(2.0),
            scaled_identity(50.0),
            scaled_identity(2.0),
            [5.0; 3],
        )
        .expect("default gains are valid")
    }
}

/// `a^x`, the matrix with `a^x b = a x b`.
pub fn cross_mat(a: Vec3) -> Mat3 {
    [[0.0, -a[2], a[1]], [a[2], 0.0, -a[0]], [-a[1], a[0], 0.0]]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttitudeRates {
    pub q0_dot: f64,
    pub qv_dot: Vec3,
    pub omega_dot: Vec3,
}

pub fn attitude_rhs(body: &RigidBody, q: &Quaternion, omega: Vec3, u: Vec3, d: Vec3) -> AttitudeRates {
    let q0_dot = -0.5 * dot(q.qv, omega);
    let qv_dot = scale(0.5, add(scale(q.q0, omega), cross(q.qv, omega)));
    let torque = add(sub(u, body.gyroscopic(omega)), d);
    AttitudeRates {
        q0_dot,
        qv_dot,
        omega_dot: mat_vec(body.inertia_inv(), torque),
    }
}

fn sig_half(v: Vec3) -> Vec3 {
    [spow(v[0], 0.5), spow(v[1], 0.5), spow(v[2], 0.5)]
}

/// Returns `(s, e)` with `e = W + kv qv` and `s = e - e0 + integral_term`.
pub fn sc_sliding(g: &ScGains, q: &Quaternion, omega: Vec3, integral_term: Vec3) -> (Vec3, Vec3) {
    let e = add(omega, scale(g.kv, q.qv));
    (add(sub(e, g.e0), integral_term), e)
}

/// Integrand of the surface, `sig(e)^{1/2}` componentwise.
pub fn sc_integrand(e: Vec3) -> Vec3 {
    sig_half(e)
}

pub fn sc_control(g: &ScGains, body: &RigidBody, q: &Quaternion, omega: Vec3, s: Vec3, e: Vec3) -> Vec3 {
    let j = body.inertia();
    // (q0 I - qv^x) W
    let kin = sub(scale(q.q0, omega), cross(q.qv, omega));
    let terms = [
        body.gyroscopic(omega),
        scale(-0.5 * g.kv, mat_vec(j, kin)),
        scale(-1.0, mat_vec(j, sig_half(e))),
        scale(-1.0, mat_vec(j, mat_vec(&g.theta, s))),
    ];
    terms.into_iter().fold([0.0; 3], add)
}

/// Returns `(d_hat, z')` with `d_hat = Lambda (W - z)` and
/// `z' = -J^-1 W^x J W + J^-1 u + J^-1 d_hat - Lambda^-1 [k_hat] sgn(d_tilde) - Lambda^-1 J^-1 s`.
#[allow(clippy::too_many_arguments)]
pub fn sc_observer_rhs(
    g: &ScGains,
    body: &RigidBody,
    omega: Vec3,
    z: Vec3,
    u: Vec3,
    k_hat: Vec3,
    sgn_dtilde: [i8; 3],
    s: Vec3,
) -> (Vec3, Vec3) {
    let d_hat = mat_vec(&g.lambda, sub(omega, z));
    let j_inv = body.inertia_inv();
    let lambda_inv = inverse(&g.lambda).expect("Lambda is positive definite");
    let switched = [
        k_hat[0] * f64::from(sgn_dtilde[0]),
        k_hat[1] * f64::from(sgn_dtilde[1]),
        k_hat[2] * f64::from(sgn_dtilde[2]),
    ];
    let model = mat_vec(j_inv, add(sub(u, body.gyroscopic(omega)), d_hat));
    let correction = mat_vec(&lambda_inv, add(switched, mat_vec(j_inv, s)));
    (d_hat, sub(model, correction))
}

/// `k_hat' = -tau k_hat + mu |s|`.
pub fn sc_k_rate(g: &ScGains, k_hat: Vec3, s: Vec3) -> Vec3 {
    let abs_s = [s[0].abs(), s[1].abs(), s[2].abs()];
    sub(mat_vec(&g.mu, abs_s), mat_vec(&diag(g.tau), k_hat))
}

/// Componentwise `sgn(omega(t) - omega(t - tau_d))`.
pub fn sign_vec(current: Vec3, delayed: Option<Vec3>) -> [i8; 3] {
    match delayed {
        Some(prev) => [
            sgn_i8(current[0] - prev[0]),
            sgn_i8(current[1] - prev[1]),
            sgn_i8(current[2] - prev[2]),
        ],
        None => [0; 3],
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScBounds {
    /// `min(lambda_min(Theta_bar), lambda_min(Lambda_bar), lambda_min(tau_0) / 2)`.
    pub gamma: f64,
    pub varrho: f64,
    /// `lambda_max(tau) ||k||^2`.
    pub delta_bar: f64,
    /// `delta_bar / (Gamma - varrho)`, the level of `V`.
    pub r_sc: f64,
    /// `sqrt(2 delta_bar / (Gamma - varrho))`.
    pub radius: f64,
}

impl ScBounds {
    /// Bound on the time for `V` to enter the `r_sc` level; zero when
    /// already inside.
    pub fn reaching_time(&self, v0: f64) -> f64 {
        if v0 <= self.r_sc {
            return 0.0;
        }
        let (g, r, d) = (self.gamma, self.varrho, self.delta_bar);
        libm::log((v0 - d / g) / (d * (1.0 / (g - r) - 1.0 / g))) / g
    }
}

pub fn sc_bounds(g: &ScGains, body: &RigidBody, k_true: Vec3, varrho: f64) -> Result<ScBounds> {
    let gamma = sc_decay_rate(g, body)?;
    if !(varrho > 0.0 && varrho < gamma) {
        return Err(Error::InvalidSplit { theta: varrho, gamma });
    }
    let tau_max = g.tau.iter().copied().fold(f64::MIN, f64::max);
    let k_norm = norm(k_true);
    let delta_bar = tau_max * k_norm * k_norm;
    let r_sc = delta_bar / (gamma - varrho);
    Ok(ScBounds {
        gamma,
        varrho,
        delta_bar,
        r_sc,
        radius: libm::sqrt(2.0 * r_sc),
    })
}

/// [`sc_bounds`] with `varrho = Gamma / 2`.
pub fn sc_default_bounds(g: &ScGains, body: &RigidBody, k_true: Vec3) -> Result<ScBounds> {
    let gamma = sc_decay_rate(g, body)?;
    sc_bounds(g, body, k_true, 0.5 * gamma)
}

fn sc_decay_rate(g: &ScGains, body: &RigidBody) -> Result<f64> {
    let mu_max = lambda_max(&g.mu);
    let theta_bar = lambda_min(&g.theta) - 0.5 * mu_max;
    let lambda_bar = lambda_min(&g.lambda_j_inv(body)) - 0.5;
    let tau0_min = g.tau.iter().map(|t| t - mu_max - 1.0).fold(f64::MAX, f64::min);
    if !(theta_bar > 0.0 && lambda_bar > 0.0 && tau0_min > 0.0) {
        return Err(Error::InvalidGains("Theta_bar, Lambda_bar and tau_0 must be positive definite"));
    }
    Ok(theta_bar.min(lambda_bar).min(0.5 * tau0_min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, transpose, ZERO3};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn cross_mat_examples() {
        assert_eq!(cross_mat([1.0, 0.0, 0.0]), [[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]]);
        let a = [1.0, 2.0, 3.0];
        assert_eq!(mat_vec(&cross_mat(a), a), ZERO3);
        let m = cross_mat(a);
        let mt = transpose(&m);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(mt[i][j], -m[i][j]);
            }
        }
    }

    #[test]
    fn attitude_rhs_examples() {
        let body = RigidBody::default();
        let q = Quaternion::from_vector_part([0.3, -0.2, 0.3]).unwrap();
        let r = attitude_rhs(&body, &q, ZERO3, ZERO3, ZERO3);
        assert_eq!((r.q0_dot, r.qv_dot, r.omega_dot), (0.0, ZERO3, ZERO3));

        let w = 0.8;
        let r = attitude_rhs(&body, &Quaternion::IDENTITY, [w, 0.0, 0.0], ZERO3, ZERO3);
        assert_eq!(r.q0_dot, 0.0);
        assert_eq!(r.qv_dot, [w / 2.0, 0.0, 0.0]);

        let unit = RigidBody::new(identity()).unwrap();
        let r = attitude_rhs(&unit, &Quaternion::IDENTITY, [1.0, 0.0, 0.0], ZERO3, ZERO3);
        assert_eq!(r.omega_dot, ZERO3);
    }

    #[test]
    fn sliding_examples() {
        let g = ScGains::default();
        let q = Quaternion::from_vector_part([0.3, -0.2, 0.3]).unwrap();
        let omega = [0.01, 0.02, -0.03];
        let (_, e) = sc_sliding(&g, &q, omega, ZERO3);
        let g = g.with_initial_error(e);
        let (s, _) = sc_sliding(&g, &q, omega, ZERO3);
        assert_eq!(s, ZERO3);

        let (_, e) = sc_sliding(&g, &Quaternion::IDENTITY, ZERO3, ZERO3);
        assert_eq!(e, ZERO3);

        let q = Quaternion::new(libm::sqrt(1.0 - 0.04), [0.2, 0.0, 0.0]);
        let (_, e) = sc_sliding(&ScGains::default(), &q, [0.1, 0.0, 0.0], ZERO3);
        assert_abs_diff_eq!(e[0], 0.3, epsilon = 1e-15);
        assert_eq!(&e[1..], &[0.0, 0.0]);
    }

    #[test]
    fn control_examples() {
        let g = ScGains::default();
        let unit = RigidBody::new(identity()).unwrap();
        let q = Quaternion::IDENTITY;
        assert_eq!(sc_control(&g, &unit, &q, ZERO3, ZERO3, ZERO3), ZERO3);
        assert_eq!(sc_control(&g, &unit, &q, ZERO3, [1.0, 0.0, 0.0], ZERO3), [-2.0, 0.0, 0.0]);
        assert_eq!(sc_control(&g, &unit, &q, ZERO3, ZERO3, [4.0, 0.0, 0.0]), [-2.0, 0.0, 0.0]);
    }

    #[test]
    fn observer_examples() {
        let g = ScGains::default();
        let body = RigidBody::default();
        let omega = [0.1, -0.2, 0.05];
        let (d_hat, _) = sc_observer_rhs(&g, &body, omega, omega, ZERO3, ZERO3, [0; 3], ZERO3);
        assert_eq!(d_hat, ZERO3);

        let (d_hat, _) = sc_observer_rhs(&g, &body, [0.02, 0.0, 0.0], ZERO3, ZERO3, ZERO3, [0; 3], ZERO3);
        assert_abs_diff_eq!(d_hat[0], 1.0, epsilon = 1e-15);

        let (_, z_dot) = sc_observer_rhs(&g, &body, ZERO3, ZERO3, ZERO3, [1.0; 3], [0; 3], ZERO3);
        assert_eq!(z_dot, ZERO3);
    }

    #[test]
    fn observer_error_dynamics() {
        // d_hat' = Lambda (W' - z') = Lambda J^-1 d_tilde + [k_hat] sgn + J^-1 s when Lambda commutes with J.
        let g = ScGains::default();
        let body = RigidBody::default();
        let omega = [0.1, -0.2, 0.05];
        let z = [0.09, -0.19, 0.06];
        let u = [0.3, -0.1, 0.2];
        let d = [0.05, 0.02, -0.04];
        let k_hat = [0.2, 0.3, 0.4];
        let sg = [1, -1, 0];
        let s = [0.01, -0.02, 0.03];
        let (d_hat, z_dot) = sc_observer_rhs(&g, &body, omega, z, u, k_hat, sg, s);
        let w_dot = attitude_rhs(&body, &Quaternion::IDENTITY, omega, u, d).omega_dot;
        let d_hat_dot = mat_vec(&g.lambda, sub(w_dot, z_dot));
        let d_tilde = sub(d, d_hat);
        let j_inv = body.inertia_inv();
        let expected = add(
            add(mat_vec(&mat_mul(&g.lambda, j_inv), d_tilde), [0.2, -0.3, 0.0]),
            mat_vec(j_inv, s),
        );
        for i in 0..3 {
            assert_abs_diff_eq!(d_hat_dot[i], expected[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn k_rate_examples() {
        let g = ScGains::default();
        assert_eq!(sc_k_rate(&g, [1.0; 3], ZERO3), [-5.0; 3]);
        assert_eq!(sc_k_rate(&g, ZERO3, ZERO3), ZERO3);
        assert_eq!(sc_k_rate(&g, [1.0, 0.0, 0.0], [2.5, 0.0, 0.0]), ZERO3);
    }

    #[test]
    fn bounds_examples() {
        let g = ScGains::default();
        let body = RigidBody::default();
        assert_abs_diff_eq!(lambda_min(&g.theta) - 0.5 * lambda_max(&g.mu), 1.0, epsilon = 1e-12);
        let b = sc_bounds(&g, &body, [1.0, 0.0, 0.0], 0.5).unwrap();
        assert_abs_diff_eq!(b.delta_bar, 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.gamma, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.r_sc, 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.radius, 20f64.sqrt(), epsilon = 1e-12);
        assert!(matches!(sc_bounds(&g, &body, [1.0, 0.0, 0.0], 1.0), Err(Error::InvalidSplit { .. })));
        assert_eq!(b.reaching_time(b.r_sc), 0.0);
        assert!(b.reaching_time(100.0) > 0.0);

        let weak = ScGains { theta: scaled_identity(0.9), ..g };
        assert!(weak.validate_with(&body).is_err());
        assert!(sc_default_bounds(&weak, &body, [1.0; 3]).is_err());
        assert!(g.validate_with(&body).is_ok());
    }

    #[test]
    fn inertia_validation() {
        assert!(RigidBody::new([[1.0, 0.1, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).is_err());
        assert!(RigidBody::new(diag([1.0, -1.0, 1.0])).is_err());
    }

    proptest! {
        #[test]
        fn gyroscopic_term_does_no_work(w in proptest::array::uniform3(-5.0f64..5.0)) {
            let body = RigidBody::default();
            let p = dot(w, body.gyroscopic(w));
            let scale = dot(w, w) * 20.0 * norm(w);
            prop_assert!(p.abs() <= 8.0 * f64::EPSILON * (1.0 + scale));
        }
    }
}

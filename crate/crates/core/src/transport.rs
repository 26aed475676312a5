//! Transport `u_t + λ(t,x) u_x = 0` on `[0,1]` with `u(t,0) = A u(t,1)`, reduced to the
//! difference equation along characteristics.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::delay::{DelayKind, DelaySpec};
use crate::error::{Error, Result};
use crate::matrix::SystemMatrix;
use crate::signal::Signal;
use crate::solver::{self, History};

/// Closed-form scalar factor of one variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum ScalarForm {
    Constant { value: f64 },
    /// `mean + amplitude·sin(frequency·s + phase)`.
    Sine { mean: f64, amplitude: f64, frequency: f64, #[serde(default)] phase: f64 },
}

impl ScalarForm {
    pub fn eval(&self, s: f64) -> f64 {
        match *self {
            ScalarForm::Constant { value } => value,
            ScalarForm::Sine { mean, amplitude, frequency, phase } => mean + amplitude * (frequency * s + phase).sin(),
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        match *self {
            ScalarForm::Constant { .. } => 0.0,
            ScalarForm::Sine { amplitude, frequency, phase, .. } => amplitude * frequency * (frequency * s + phase).cos(),
        }
    }

    fn range(&self) -> (f64, f64) {
        match *self {
            ScalarForm::Constant { value } => (value, value),
            ScalarForm::Sine { mean, amplitude, .. } => (mean - amplitude.abs(), mean + amplitude.abs()),
        }
    }

    fn derivative_bound(&self) -> f64 {
        match *self {
            ScalarForm::Constant { .. } => 0.0,
            ScalarForm::Sine { amplitude, frequency, .. } => (amplitude * frequency).abs(),
        }
    }

    fn is_finite(&self) -> bool {
        match *self {
            ScalarForm::Constant { value } => value.is_finite(),
            ScalarForm::Sine { mean, amplitude, frequency, phase } => {
                [mean, amplitude, frequency, phase].iter().all(|v| v.is_finite())
            }
        }
    }
}

/// One separable term `a(t)·b(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub time: ScalarForm,
    pub space: ScalarForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LambdaForm {
    Constant { lambda0: f64 },
    SeparableProduct { time: ScalarForm, space: ScalarForm },
    /// Sum of separable terms.
    TimeVarying { terms: Vec<Term> },
}

/// Speed field with `0 < λ_min ≤ λ ≤ λ_max` and `|∂ₓλ| ≤ L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LambdaForm", into = "LambdaForm")]
pub struct TransportField {
    form: LambdaForm,
    lambda_min: f64,
    lambda_max: f64,
    lipschitz: f64,
}

impl From<TransportField> for LambdaForm {
    fn from(f: TransportField) -> Self {
        f.form
    }
}

impl TryFrom<LambdaForm> for TransportField {
    type Error = Error;
    fn try_from(form: LambdaForm) -> Result<Self> {
        TransportField::new(form)
    }
}

fn term_bounds(t: &Term) -> Result<(f64, f64, f64)> {
    if !t.time.is_finite() || !t.space.is_finite() {
        return Err(Error::Invalid("non-finite speed field parameter".into()));
    }
    let (alo, ahi) = t.time.range();
    let (blo, bhi) = t.space.range();
    if alo <= 0.0 || blo <= 0.0 {
        return Err(Error::Invalid("speed factors must be bounded below by a positive constant".into()));
    }
    Ok((alo * blo, ahi * bhi, ahi * t.space.derivative_bound()))
}

impl TransportField {
    pub fn new(form: LambdaForm) -> Result<Self> {
        let terms = match &form {
            LambdaForm::Constant { lambda0 } => {
                vec![Term { time: ScalarForm::Constant { value: 1.0 }, space: ScalarForm::Constant { value: *lambda0 } }]
            }
            LambdaForm::SeparableProduct { time, space } => vec![Term { time: *time, space: *space }],
            LambdaForm::TimeVarying { terms } => terms.clone(),
        };
        if terms.is_empty() {
            return Err(Error::Invalid("speed field needs at least one term".into()));
        }
        let (mut lo, mut hi, mut l) = (0.0, 0.0, 0.0);
        for t in &terms {
            let (a, b, c) = term_bounds(t)?;
            lo += a;
            hi += b;
            l += c;
        }
        Ok(TransportField { form, lambda_min: lo, lambda_max: hi, lipschitz: l })
    }

    pub fn constant(lambda0: f64) -> Result<Self> {
        Self::new(LambdaForm::Constant { lambda0 })
    }

    pub fn form(&self) -> &LambdaForm {
        &self.form
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    /// Bound `L` on `|∂ₓλ|`.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn lambda(&self, t: f64, x: f64) -> f64 {
        match &self.form {
            LambdaForm::Constant { lambda0 } => *lambda0,
            LambdaForm::SeparableProduct { time, space } => time.eval(t) * space.eval(x),
            LambdaForm::TimeVarying { terms } => terms.iter().map(|k| k.time.eval(t) * k.space.eval(x)).sum(),
        }
    }

    pub fn dx_lambda(&self, t: f64, x: f64) -> f64 {
        match &self.form {
            LambdaForm::Constant { .. } => 0.0,
            LambdaForm::SeparableProduct { time, space } => time.eval(t) * space.derivative(x),
            LambdaForm::TimeVarying { terms } => terms.iter().map(|k| k.time.eval(t) * k.space.derivative(x)).sum(),
        }
    }

    /// Lower bound on `|∂ₓR|`.
    pub fn beta0(&self) -> f64 {
        (-self.lipschitz / self.lambda_min).exp() / self.lambda_max
    }

    /// Upper bound on `|∂ₓR|`.
    pub fn beta1(&self) -> f64 {
        (self.lipschitz / self.lambda_min).exp() / self.lambda_min
    }

    /// Bound `α < 1` on the derivative of the induced delay.
    pub fn tau_prime_bound(&self) -> f64 {
        1.0 - self.lambda_min / self.lambda_max * (-self.lipschitz / self.lambda_min).exp()
    }
}

pub const DEFAULT_ROOT_TOL: f64 = 1e-10;
const STEPS_PER_T0: f64 = 200.0;

/// Flow `Φ`, hitting map `R` and `T₀` for a speed field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicMaps {
    pub field: TransportField,
    pub ode_step: f64,
    pub root_tol: f64,
    /// `Φ(−T₀, 0, 1) = 0`.
    pub t0: f64,
}

impl CharacteristicMaps {
    pub fn new(field: TransportField) -> Result<Self> {
        Self::with_options(field, None, None)
    }

    /// Defaults: `ode_step = T₀/200`, `root_tol = 1e−10`.
    pub fn with_options(field: TransportField, ode_step: Option<f64>, root_tol: Option<f64>) -> Result<Self> {
        let root_tol = root_tol.unwrap_or(DEFAULT_ROOT_TOL);
        if !(root_tol > 0.0) {
            return Err(Error::Invalid("root_tol must be positive".into()));
        }
        let provisional = 1.0 / field.lambda_max / STEPS_PER_T0;
        let mut maps = CharacteristicMaps { field, ode_step: ode_step.unwrap_or(provisional), root_tol, t0: 0.0 };
        if !(maps.ode_step > 0.0) {
            return Err(Error::Invalid("ode_step must be positive".into()));
        }
        maps.t0 = -maps.hitting_time(0.0, 1.0)?;
        if ode_step.is_none() {
            maps.ode_step = maps.t0 / STEPS_PER_T0;
            maps.t0 = -maps.hitting_time(0.0, 1.0)?;
        }
        Ok(maps)
    }

    fn rk4(&self, t_from: f64, x: f64, t_to: f64) -> f64 {
        let span = t_to - t_from;
        if span == 0.0 {
            return x;
        }
        let n = (span.abs() / self.ode_step).ceil().max(1.0) as usize;
        let h = span / n as f64;
        let f = |t: f64, x: f64| self.field.lambda(t, x);
        let mut x = x;
        for i in 0..n {
            let t = t_from + h * i as f64;
            let k1 = f(t, x);
            let k2 = f(t + 0.5 * h, x + 0.5 * h * k1);
            let k3 = f(t + 0.5 * h, x + 0.5 * h * k2);
            let k4 = f(t + h, x + h * k3);
            x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        x
    }

    /// `Φ(t, t₀, x₀)`.
    pub fn flow(&self, t: f64, t0: f64, x0: f64) -> f64 {
        self.rk4(t0, x0, t)
    }

    /// `X₀(t, x) = Φ(0, t, x)`.
    pub fn x0_map(&self, t: f64, x: f64) -> f64 {
        self.flow(0.0, t, x)
    }

    /// `R(t, x)`: the unique `s` with `Φ(s, t, x) = 0`.
    pub fn hitting_time(&self, t: f64, x: f64) -> Result<f64> {
        if x == 0.0 {
            return Ok(t);
        }
        let (lmin, lmax) = (self.field.lambda_min, self.field.lambda_max);
        let dir = -x.signum();
        let slack = 1e-9 * x.abs() / lmax;
        let mut near = t + dir * (x.abs() / lmax - slack).max(0.0);
        let mut far = t + dir * (x.abs() / lmin + slack);
        let mut x_near = self.rk4(t, x, near);
        let x_far = self.rk4(near, x_near, far);
        if x_near * x <= 0.0 && x_near != 0.0 || x_far * x > 0.0 {
            return Err(Error::Bracket(format!("R({t}, {x}) not in the speed-bound bracket")));
        }
        if x_near == 0.0 {
            return Ok(near);
        }
        while (far - near).abs() > self.root_tol {
            let mid = 0.5 * (near + far);
            let x_mid = self.rk4(near, x_near, mid);
            if x_mid * x > 0.0 {
                near = mid;
                x_near = x_mid;
            } else if x_mid == 0.0 {
                return Ok(mid);
            } else {
                far = mid;
            }
        }
        Ok(near - x_near / self.field.lambda(near, x_near))
    }

    /// `τ(t) = t − R(t, 1)`.
    pub fn induced_delay(&self, t: f64) -> Result<f64> {
        Ok(t - self.hitting_time(t, 1.0)?)
    }

    /// `∫ₜ^R ∂ₓλ(s, Φ(s,t,x)) ds` along the characteristic through `(t, x)`.
    fn log_stretch(&self, t: f64, x: f64, r: f64) -> f64 {
        let span = r - t;
        if span == 0.0 {
            return 0.0;
        }
        let n = (span.abs() / self.ode_step).ceil().max(1.0) as usize;
        let h = span / n as f64;
        let f = |s: f64, y: f64| (self.field.lambda(s, y), self.field.dx_lambda(s, y));
        let (mut y, mut acc) = (x, 0.0);
        for i in 0..n {
            let s = t + h * i as f64;
            let (k1, j1) = f(s, y);
            let (k2, j2) = f(s + 0.5 * h, y + 0.5 * h * k1);
            let (k3, j3) = f(s + 0.5 * h, y + 0.5 * h * k2);
            let (k4, j4) = f(s + h, y + h * k3);
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            acc += h / 6.0 * (j1 + 2.0 * j2 + 2.0 * j3 + j4);
        }
        acc
    }

    /// `∂ₓR(t, x) = −exp(∫ₜ^R ∂ₓλ) / λ(R, 0)`.
    pub fn dx_hitting_time(&self, t: f64, x: f64) -> Result<f64> {
        let r = self.hitting_time(t, x)?;
        Ok(-self.log_stretch(t, x, r).exp() / self.field.lambda(r, 0.0))
    }

    /// `∂ₜR(t, x) = λ(t, x)·exp(∫ₜ^R ∂ₓλ) / λ(R, 0)`.
    pub fn dt_hitting_time(&self, t: f64, x: f64) -> Result<f64> {
        let r = self.hitting_time(t, x)?;
        Ok(self.field.lambda(t, x) * self.log_stretch(t, x, r).exp() / self.field.lambda(r, 0.0))
    }

    /// The induced delay as a `DelaySpec` sharing this step and tolerance.
    pub fn delay_spec(&self) -> Result<DelaySpec> {
        DelaySpec::new(DelayKind::TransportInduced {
            field: self.field.clone(),
            ode_step: Some(self.ode_step),
            root_tol: Some(self.root_tol),
        })
    }
}

/// `v₀(s) = u₀(X₀(s, 0))` on `[−T₀, 0)`.
pub struct BoundaryHistory<'a> {
    pub maps: &'a CharacteristicMaps,
    pub u0: &'a Signal,
}

impl History for BoundaryHistory<'_> {
    fn dim(&self) -> usize {
        self.u0.dim()
    }

    fn left(&self) -> f64 {
        -self.maps.t0
    }

    fn eval(&self, s: f64) -> Result<DVector<f64>> {
        // the root tolerance may leave R a hair below −T₀
        let slack = 10.0 * self.maps.root_tol;
        if s < -self.maps.t0 - slack || s > 0.0 {
            return Err(Error::HistoryOutOfRange { s, left: -self.maps.t0 });
        }
        let x = self.maps.x0_map(s, 0.0).clamp(0.0, 1.0);
        self.u0.eval(x)
    }
}

/// Boundary trace `v` of a transport solution with `u(t, x) = v(R(t, x))`.
pub struct TransportSolution<'a> {
    pub maps: &'a CharacteristicMaps,
    pub matrix: &'a SystemMatrix,
    pub delay: DelaySpec,
    pub history: BoundaryHistory<'a>,
}

impl<'a> TransportSolution<'a> {
    pub fn new(maps: &'a CharacteristicMaps, matrix: &'a SystemMatrix, u0: &'a Signal) -> Result<Self> {
        if u0.left() != 0.0 || u0.end != 1.0 {
            return Err(Error::Invalid("transport initial condition must live on [0, 1]".into()));
        }
        if u0.dim() != matrix.dim() {
            return Err(Error::Invalid("initial condition and matrix dimensions differ".into()));
        }
        Ok(TransportSolution { maps, matrix, delay: maps.delay_spec()?, history: BoundaryHistory { maps, u0 } })
    }

    /// `|u₀(0) − A u₀(1)|`, zero for data compatible with the boundary condition.
    pub fn compatibility_defect(&self) -> Result<f64> {
        let u0 = self.history.u0;
        Ok((u0.eval(0.0)? - self.matrix.apply(&u0.eval(1.0)?)).norm())
    }

    /// `v(s)` for `s ≥ −T₀`.
    pub fn boundary(&self, s: f64) -> Result<DVector<f64>> {
        if s < 0.0 {
            return self.history.eval(s);
        }
        solver::represent(self.matrix, &self.delay, &self.history, s)
    }

    pub fn u(&self, t: f64, x: f64) -> Result<DVector<f64>> {
        self.boundary(self.maps.hitting_time(t, x)?)
    }
}

/// `u(t, xᵢ)` at every `xᵢ` of the grid.
pub fn solve_transport(
    maps: &CharacteristicMaps,
    matrix: &SystemMatrix,
    u0: &Signal,
    t: f64,
    x_grid: &[f64],
) -> Result<Vec<DVector<f64>>> {
    let sol = TransportSolution::new(maps, matrix, u0)?;
    x_grid.iter().map(|x| sol.u(t, *x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_speed_closed_forms() {
        let maps = CharacteristicMaps::new(TransportField::constant(2.0).unwrap()).unwrap();
        assert!((maps.flow(1.0, 0.0, 0.0) - 2.0).abs() < 1e-12);
        assert_eq!(maps.flow(0.3, 0.3, 0.7), 0.7);
        assert!((maps.t0 - 0.5).abs() < 1e-12);
        assert!((maps.hitting_time(3.0, 0.4).unwrap() - 2.8).abs() < 1e-12);
        assert_eq!(maps.hitting_time(1.7, 0.0).unwrap(), 1.7);
        assert!((maps.induced_delay(4.0).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn negative_abscissa_hits_forward() {
        let f = TransportField::new(LambdaForm::SeparableProduct {
            time: ScalarForm::Sine { mean: 1.0, amplitude: 0.3, frequency: 1.0, phase: 0.0 },
            space: ScalarForm::Sine { mean: 1.0, amplitude: 0.4, frequency: 1.0, phase: 0.0 },
        })
        .unwrap();
        let maps = CharacteristicMaps::new(f).unwrap();
        let r = maps.hitting_time(0.5, -0.3).unwrap();
        assert!(r > 0.5);
        assert!(maps.flow(r, 0.5, -0.3).abs() < 1e-9);
    }

    #[test]
    fn field_bounds() {
        let f = TransportField::new(LambdaForm::SeparableProduct {
            time: ScalarForm::Constant { value: 1.0 },
            space: ScalarForm::Sine { mean: 1.0, amplitude: 0.4, frequency: 1.0, phase: 0.0 },
        })
        .unwrap();
        assert!((f.lambda_min() - 0.6).abs() < 1e-15);
        assert!((f.lambda_max() - 1.4).abs() < 1e-15);
        assert!((f.lipschitz() - 0.4).abs() < 1e-15);
        assert!(TransportField::constant(-1.0).is_err());
    }

    #[test]
    fn unit_speed_solution() {
        let maps = CharacteristicMaps::new(TransportField::constant(1.0).unwrap()).unwrap();
        let a = SystemMatrix::scalar(0.5);
        let mut u0 = Signal::constant(vec![1.0], 0.0);
        u0.end = 1.0;
        let u = solve_transport(&maps, &a, &u0, 0.5, &[0.25]).unwrap();
        assert!((u[0][0] - 0.5).abs() < 1e-12);
    }
}

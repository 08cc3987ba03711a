//! Operator monotone decreasing functions `f` on `(0, ∞)` together with the
//! canonical data `(a, b, μ)` of the Pick function `−f`:
//!
//! ```text
//! −f(x) = a·x + b + ∫₀^∞ ( t/(t²+1) − 1/(t+x) ) w(t) dt,   dμ(t) = w(t) dt.
//! ```
//!
//! The sign of `t` follows the physics convention (the measure lives on the
//! positive half line); the Stieltjes inversion below therefore samples the
//! Pick function just above the negative real axis.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::matrix::{c64, C64};
use crate::modular::SpectralFunction;
use crate::quadrature::{integrate_half_line, QuadOptions};

/// Number of log-spaced points used to bound `1/w` for user-supplied reps.
pub const C_GRID_POINTS: usize = 1024;

/// Certificate `C^f_{T,β} ≤ C · T^{2c}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Growth {
    pub constant: f64,
    pub exponent: f64,
}

/// `C^f_{T,β}` and whether it came from a grid estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CConstant {
    pub value: f64,
    pub grid_estimated: bool,
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type ComplexFn = Arc<dyn Fn(C64) -> C64 + Send + Sync>;

#[derive(Clone)]
enum Family {
    NegLog,
    NegPower(f64),
    Custom {
        eval: RealFn,
        density: RealFn,
        pick: Option<ComplexFn>,
    },
}

#[derive(Clone)]
pub struct MonotoneDecreasingRep {
    name: String,
    family: Family,
    a: f64,
    b: f64,
    at_zero: f64,
    growth: Growth,
}

impl fmt::Debug for MonotoneDecreasingRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MonotoneDecreasingRep")
            .field("name", &self.name)
            .field("a", &self.a)
            .field("b", &self.b)
            .field("at_zero", &self.at_zero)
            .field("growth", &self.growth)
            .finish()
    }
}

/// User-supplied rep; see [`MonotoneDecreasingRep::custom`].
pub struct CustomRep {
    pub name: String,
    pub eval: RealFn,
    /// `f(0⁺)`, possibly `+∞`.
    pub at_zero: f64,
    pub a: f64,
    pub b: f64,
    pub density: RealFn,
    pub growth: Growth,
    pub pick: Option<ComplexFn>,
}

impl MonotoneDecreasingRep {
    /// `f(x) = −log x`: `a = b = 0`, `w ≡ 1`, `C^f_{T,β} = 1`.
    pub fn neg_log() -> Self {
        MonotoneDecreasingRep {
            name: "neg-log".into(),
            family: Family::NegLog,
            a: 0.0,
            b: 0.0,
            at_zero: f64::INFINITY,
            growth: Growth { constant: 1.0, exponent: 0.0 },
        }
    }

    /// `f(x) = −x^α`: `a = 0`, `b = Re i^α = cos(απ/2)`, `w(t) = sin(απ) t^α / π`.
    pub fn neg_power(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return invalid(format!("power exponent must lie in (0, 1), got {alpha}"));
        }
        Ok(MonotoneDecreasingRep {
            name: format!("neg-power:{alpha}"),
            family: Family::NegPower(alpha),
            a: 0.0,
            b: (alpha * PI / 2.0).cos(),
            at_zero: 0.0,
            growth: Growth { constant: PI / (alpha * PI).sin(), exponent: alpha / 2.0 },
        })
    }

    pub fn custom(rep: CustomRep) -> Result<Self> {
        if !(rep.a >= 0.0) || !rep.b.is_finite() {
            return invalid(format!("need a >= 0 and finite b, got a={} b={}", rep.a, rep.b));
        }
        if !(rep.growth.constant > 0.0 && rep.growth.exponent >= 0.0) {
            return invalid("growth certificate needs C > 0 and c >= 0");
        }
        Ok(MonotoneDecreasingRep {
            name: rep.name,
            family: Family::Custom { eval: rep.eval, density: rep.density, pick: rep.pick },
            a: rep.a,
            b: rep.b,
            at_zero: rep.at_zero,
            growth: rep.growth,
        })
    }

    /// `f(x) = −log x − a·x`: a synthetic rep with a nonzero linear term.
    pub fn neg_log_linear(a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return invalid(format!("linear coefficient must be positive, got {a}"));
        }
        Self::custom(CustomRep {
            name: format!("neg-log-linear:{a}"),
            eval: Arc::new(move |x| -x.ln() - a * x),
            at_zero: f64::INFINITY,
            a,
            b: 0.0,
            density: Arc::new(|_| 1.0),
            growth: Growth { constant: 1.0, exponent: 0.0 },
            pick: Some(Arc::new(move |z: C64| z.ln() + z * a)),
        })
    }

    /// Parses `neg-log`, `neg-power:<α>` or `neg-log-linear:<a>`.
    pub fn from_name(name: &str) -> Result<Self> {
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("bad number {s:?} in function name {name:?}")))
        };
        match name.split_once(':') {
            None if name == "neg-log" => Ok(Self::neg_log()),
            Some(("neg-power", v)) => Self::neg_power(parse(v)?),
            Some(("neg-log-linear", v)) => Self::neg_log_linear(parse(v)?),
            _ => invalid(format!("unknown function {name:?}")),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `f(0⁺)` as an extended real.
    pub fn at_zero(&self) -> f64 {
        self.at_zero
    }

    pub fn is_builtin(&self) -> bool {
        !matches!(self.family, Family::Custom { .. })
    }

    /// The power `α` for `neg-power` reps.
    pub fn power(&self) -> Option<f64> {
        match self.family {
            Family::NegPower(alpha) => Some(alpha),
            _ => None,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x == 0.0 {
            return self.at_zero;
        }
        match &self.family {
            Family::NegLog => -x.ln(),
            Family::NegPower(alpha) => -x.powf(*alpha),
            Family::Custom { eval, .. } => eval(x),
        }
    }

    /// Density `w(t)` of the representing measure.
    pub fn density(&self, t: f64) -> f64 {
        match &self.family {
            Family::NegLog => 1.0,
            Family::NegPower(alpha) => (alpha * PI).sin() / PI * t.powf(*alpha),
            Family::Custom { density, .. } => density(t),
        }
    }

    /// The Pick function `−f` continued to the upper half plane, if known.
    pub fn pick_function(&self, z: C64) -> Option<C64> {
        match &self.family {
            Family::NegLog => Some(z.ln()),
            Family::NegPower(alpha) => Some(z.powf(*alpha)),
            Family::Custom { pick, .. } => pick.as_ref().map(|p| p(z)),
        }
    }

    /// Declared growth certificate `(C, c)`.
    pub fn growth(&self) -> Growth {
        self.growth
    }

    /// Growth certificate valid for all `T > 0` at this `β`.
    ///
    /// For `neg-power` and `β > 1/2` the regularity interval starts at
    /// `T^{−(1−β)/β}`, so the exact constant is `C · T^{α(1−β)/β}`.
    pub fn growth_at(&self, beta: f64) -> Growth {
        match self.family {
            Family::NegPower(alpha) if beta > 0.5 => Growth {
                constant: self.growth.constant,
                exponent: alpha * (1.0 - beta) / (2.0 * beta),
            },
            _ => self.growth,
        }
    }

    /// `C^f_{T,β}`: the least constant with `dt ≤ C dμ` on `[T_L⁻¹, T_R]`.
    pub fn c_constant(&self, t: f64, beta: f64) -> Result<CConstant> {
        check_beta(beta)?;
        if !(t > 0.0 && t.is_finite()) {
            return invalid(format!("T must be positive, got {t}"));
        }
        let (t_left, t_right) = regularity_window(t, beta);
        match self.family {
            Family::NegLog => Ok(CConstant { value: 1.0, grid_estimated: false }),
            Family::NegPower(alpha) => Ok(CConstant {
                value: PI / (alpha * PI).sin() * t_left.powf(alpha),
                grid_estimated: false,
            }),
            Family::Custom { .. } => {
                // a reversed window (T < 1) carries no mass; the ordered one is a safe stand-in
                let (lo, hi) = {
                    let (x, y) = (1.0 / t_left, t_right);
                    (x.min(y), x.max(y))
                };
                let mut sup: f64 = 0.0;
                for k in 0..C_GRID_POINTS {
                    let s = k as f64 / (C_GRID_POINTS - 1) as f64;
                    let tk = lo * (hi / lo).powf(s);
                    let w = self.density(tk);
                    if !(w > 0.0 && w.is_finite()) {
                        return Err(Error::NotRegular(format!("w({tk:e}) = {w}")));
                    }
                    sup = sup.max(1.0 / w);
                }
                Ok(CConstant { value: sup, grid_estimated: true })
            }
        }
    }

    /// Checks the stored data: `w ≥ 0` on a grid, `∫ w/(t²+1) < ∞`, and the
    /// reconstruction identity on a few points.
    pub fn validate(&self) -> Result<f64> {
        for k in 0..C_GRID_POINTS {
            let t = 10f64.powf(-6.0 + 12.0 * k as f64 / (C_GRID_POINTS - 1) as f64);
            let w = self.density(t);
            if !(w >= 0.0) {
                return invalid(format!("density is negative or undefined at t={t:e}: {w}"));
            }
        }
        let mass = integrate_half_line(|t| self.density(t) / (t * t + 1.0), QuadOptions::with_tol(1e-9))?;
        if !mass.is_finite() {
            return invalid("∫ w/(t²+1) diverges");
        }
        verify_representation(self, &[0.5, 1.0, 2.0, 10.0])
    }
}

impl SpectralFunction for MonotoneDecreasingRep {
    fn value(&self, x: f64) -> f64 {
        self.eval(x)
    }

    fn limit_at_zero(&self) -> Option<f64> {
        Some(self.at_zero)
    }
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta < 1.0) {
        return invalid(format!("β must lie in (0, 1), got {beta}"));
    }
    Ok(())
}

/// `(T_L(β), T_R(β))`.
pub fn regularity_window(t: f64, beta: f64) -> (f64, f64) {
    if beta <= 0.5 {
        (t, t.powf(beta / (1.0 - beta)))
    } else {
        (t.powf((1.0 - beta) / beta), t)
    }
}

/// `(a, b)` of a Pick function: `a = lim f(iy)/(iy)`, `b = Re f(i)`.
///
/// The limit is taken by Aitken's Δ² over `y ∈ {1e6, 1e7, 1e8}`, which is
/// exact when `Re f(iy)/(iy) − a` decays geometrically along that ladder
/// (as it does for `log` and the powers).
pub fn pick_coefficients(f: &dyn Fn(C64) -> C64) -> Result<(f64, f64)> {
    let ratio = |y: f64| (f(c64(0.0, y)) / c64(0.0, y)).re;
    let g = [ratio(1e6), ratio(1e7), ratio(1e8)];
    let b = f(c64(0.0, 1.0)).re;
    if g.iter().chain([&b]).any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure("non-finite Pick function value".into()));
    }
    let d1 = g[1] - g[0];
    let d2 = g[2] - g[1];
    let curvature = d2 - d1;
    let a = if curvature.abs() <= 1e-300 || d2 == 0.0 {
        g[2]
    } else {
        g[2] - d2 * d2 / curvature
    };
    Ok((a, b))
}

/// Default largest offset of the Stieltjes inversion ladder.
pub const STIELTJES_OFFSET: f64 = 1e-4;

/// Density of the representing measure at `x > 0`:
/// `lim_{y↓0} Im f(−x + iy) / π`, Richardson-extrapolated over `y_offset`,
/// `y_offset/10`, `y_offset/100`.
pub fn stieltjes_density(f: &dyn Fn(C64) -> C64, x: f64, y_offset: f64) -> Result<f64> {
    if !(x > 0.0) || !(y_offset > 0.0) {
        return invalid(format!("need x > 0 and y_offset > 0, got {x}, {y_offset}"));
    }
    let g = |y: f64| f(c64(-x, y)).im / PI;
    let (g0, g1, g2) = (g(y_offset), g(y_offset / 10.0), g(y_offset / 100.0));
    if ![g0, g1, g2].iter().all(|v| v.is_finite()) {
        return Err(Error::NumericalFailure(format!("non-finite boundary values at x={x}")));
    }
    let r1 = (10.0 * g1 - g0) / 9.0;
    let r2 = (10.0 * g2 - g1) / 9.0;
    if (r1 - r2).abs() > 1e-3 * r2.abs().max(1e-12) {
        return Err(Error::NumericalFailure(format!(
            "Stieltjes extrapolation diverges at x={x}: {r1} vs {r2}"
        )));
    }
    Ok(((100.0 * r2 - r1) / 99.0).max(0.0))
}

/// `(tx − 1) / ((t²+1)(t+x))`, i.e. `t/(t²+1) − 1/(t+x)` without cancellation.
fn representation_kernel(t: f64, x: f64) -> f64 {
    (t * x - 1.0) / ((t * t + 1.0) * (t + x))
}

/// Largest deviation between `−f(x)` and `a·x + b + ∫ kernel · w` over `xs`.
pub fn verify_representation(rep: &MonotoneDecreasingRep, xs: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &x in xs {
        if !(x > 0.0) {
            return invalid(format!("grid points must be positive, got {x}"));
        }
        let integral = integrate_half_line(
            |t| representation_kernel(t, x) * rep.density(t),
            QuadOptions::with_tol(1e-11),
        )?;
        let rhs = rep.a() * x + rep.b() + integral;
        worst = worst.max((-rep.eval(x) - rhs).abs());
    }
    Ok(worst)
}

//! Spatial profiles W(x), f(x), m(x), V(x).
//!
//! Every shape knows its value and first two derivatives. Shapes without a
//! closed-form derivative (tabulated samples, custom closures registered
//! without one) fall back to central differences; the step used is reported by
//! [`ProfileSpec::fd_step`] so callers can see which path was taken.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::Grid;

/// Default central-difference step for custom closures without a derivative.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

pub type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Samples of a profile on a uniform grid, linearly interpolated between nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    grid: Grid,
    samples: Vec<f64>,
}

impl Tabulated {
    pub fn new(grid: Grid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                found: samples.len(),
            });
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidInput("tabulated samples must be finite".into()));
        }
        Ok(Self { grid, samples })
    }

    /// Tabulate `f` at the nodes of `grid`.
    pub fn sample(grid: &Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let samples = grid.nodes().iter().map(|&x| f(x)).collect();
        Self::new(grid.clone(), samples)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    fn interpolate(&self, x: f64) -> Result<f64> {
        let lo = -self.grid.half_length();
        let hi = self.grid.half_length();
        let slack = 1e-12 * hi.max(1.0);
        if !(x >= lo - slack && x <= hi + slack) {
            return Err(Error::OutOfRange { x, lo, hi });
        }
        let h = self.grid.spacing();
        let last = self.samples.len() - 1;
        let t = ((x - lo) / h).clamp(0.0, last as f64);
        let i = (t.floor() as usize).min(last - 1);
        let frac = t - i as f64;
        Ok(self.samples[i] * (1.0 - frac) + self.samples[i + 1] * frac)
    }

    fn derivative(&self, x: f64) -> Result<f64> {
        let h = self.grid.spacing();
        let lo = -self.grid.half_length();
        let hi = self.grid.half_length();
        // one-sided at the ends of the table
        let (a, b) = if x - h < lo {
            (x, x + h)
        } else if x + h > hi {
            (x - h, x)
        } else {
            (x - h, x + h)
        };
        Ok((self.interpolate(b)? - self.interpolate(a)?) / (b - a))
    }
}

/// A user-supplied closure, optionally with its analytic derivative.
#[derive(Clone)]
pub struct CustomProfile {
    name: String,
    value: ProfileFn,
    derivative: Option<ProfileFn>,
    fd_step: f64,
}

impl CustomProfile {
    pub fn new(name: impl Into<String>, value: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            value: Arc::new(value),
            derivative: None,
            fd_step: DEFAULT_FD_STEP,
        }
    }

    pub fn with_derivative(mut self, derivative: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.derivative = Some(Arc::new(derivative));
        self
    }

    pub fn with_fd_step(mut self, step: f64) -> Self {
        self.fd_step = step;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn has_analytic_derivative(&self) -> bool {
        self.derivative.is_some()
    }
}

impl fmt::Debug for CustomProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomProfile")
            .field("name", &self.name)
            .field("analytic_derivative", &self.derivative.is_some())
            .field("fd_step", &self.fd_step)
            .finish()
    }
}

/// The shapes a profile can take.
#[derive(Debug, Clone)]
pub enum ProfileSpec {
    /// `slope * x + offset`
    Linear {
        slope: f64,
        offset: f64,
    },
    /// `amplitude * tanh(x) + shift`
    Tanh {
        amplitude: f64,
        shift: f64,
    },
    /// `tanh(x)^exponent + shift`, exponent odd and at least 1
    TanhPower {
        exponent: u32,
        shift: f64,
    },
    /// `a * tanh(x) + b * sech(x)`
    TanhSech {
        a: f64,
        b: f64,
    },
    /// `plus` for x >= 0 and `-minus` for x < 0; both stored as magnitudes.
    Step {
        plus: f64,
        minus: f64,
    },
    Tabulated(Tabulated),
    Custom(CustomProfile),
    /// `factor * inner(x)`
    Scaled {
        factor: f64,
        inner: Box<ProfileSpec>,
    },
}

fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

impl ProfileSpec {
    pub fn constant(value: f64) -> Self {
        ProfileSpec::Linear {
            slope: 0.0,
            offset: value,
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn tanh(amplitude: f64) -> Self {
        ProfileSpec::Tanh { amplitude, shift: 0.0 }
    }

    pub fn tanh_power(exponent: u32, shift: f64) -> Result<Self> {
        let p = ProfileSpec::TanhPower { exponent, shift };
        p.validate()?;
        Ok(p)
    }

    pub fn step(plus: f64, minus: f64) -> Result<Self> {
        let p = ProfileSpec::Step { plus, minus };
        p.validate()?;
        Ok(p)
    }

    /// `factor * self`, folded into the shape parameters where possible.
    pub fn scaled(&self, factor: f64) -> Self {
        match self {
            ProfileSpec::Linear { slope, offset } => ProfileSpec::Linear {
                slope: slope * factor,
                offset: offset * factor,
            },
            ProfileSpec::Tanh { amplitude, shift } => ProfileSpec::Tanh {
                amplitude: amplitude * factor,
                shift: shift * factor,
            },
            ProfileSpec::TanhSech { a, b } => ProfileSpec::TanhSech {
                a: a * factor,
                b: b * factor,
            },
            ProfileSpec::Scaled {
                factor: inner_factor,
                inner,
            } => ProfileSpec::Scaled {
                factor: factor * inner_factor,
                inner: inner.clone(),
            },
            other => ProfileSpec::Scaled {
                factor,
                inner: Box::new(other.clone()),
            },
        }
    }

    /// Checks the shape invariants that the enum cannot express by itself.
    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("{name} must be finite, got {v}")))
            }
        };
        match self {
            ProfileSpec::Linear { slope, offset } => {
                finite("slope", *slope)?;
                finite("offset", *offset)
            }
            ProfileSpec::Tanh { amplitude, shift } => {
                finite("amplitude", *amplitude)?;
                finite("shift", *shift)
            }
            ProfileSpec::TanhPower { exponent, shift } => {
                if *exponent == 0 || exponent % 2 == 0 {
                    return Err(Error::InvalidInput(format!(
                        "tanh power exponent must be odd and >= 1, got {exponent}"
                    )));
                }
                finite("shift", *shift)
            }
            ProfileSpec::TanhSech { a, b } => {
                finite("a", *a)?;
                finite("b", *b)
            }
            ProfileSpec::Step { plus, minus } => {
                finite("plus", *plus)?;
                finite("minus", *minus)
            }
            ProfileSpec::Tabulated(_) => Ok(()),
            ProfileSpec::Custom(c) => {
                if c.fd_step > 0.0 && c.fd_step.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidInput("custom profile fd step must be positive".into()))
                }
            }
            ProfileSpec::Scaled { factor, inner } => {
                finite("factor", *factor)?;
                inner.validate()
            }
        }
    }

    /// W(x).
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::InvalidInput(format!("profile argument must be finite, got {x}")));
        }
        Ok(match self {
            ProfileSpec::Linear { slope, offset } => slope * x + offset,
            ProfileSpec::Tanh { amplitude, shift } => amplitude * x.tanh() + shift,
            ProfileSpec::TanhPower { exponent, shift } => x.tanh().powi(*exponent as i32) + shift,
            ProfileSpec::TanhSech { a, b } => a * x.tanh() + b * sech(x),
            ProfileSpec::Step { plus, minus } => {
                if x >= 0.0 {
                    *plus
                } else {
                    -*minus
                }
            }
            ProfileSpec::Tabulated(t) => t.interpolate(x)?,
            ProfileSpec::Custom(c) => (c.value)(x),
            ProfileSpec::Scaled { factor, inner } => factor * inner.evaluate(x)?,
        })
    }

    /// W'(x), analytic where the shape allows it.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::InvalidInput(format!("profile argument must be finite, got {x}")));
        }
        Ok(match self {
            ProfileSpec::Linear { slope, .. } => *slope,
            ProfileSpec::Tanh { amplitude, .. } => amplitude * sech(x).powi(2),
            ProfileSpec::TanhPower { exponent, .. } => {
                let p = *exponent as i32;
                p as f64 * x.tanh().powi(p - 1) * sech(x).powi(2)
            }
            ProfileSpec::TanhSech { a, b } => {
                let s = sech(x);
                a * s * s - b * s * x.tanh()
            }
            ProfileSpec::Step { .. } => {
                if x == 0.0 {
                    return Err(Error::StepSingularity);
                }
                0.0
            }
            ProfileSpec::Tabulated(t) => t.derivative(x)?,
            ProfileSpec::Custom(c) => match &c.derivative {
                Some(d) => d(x),
                None => ((c.value)(x + c.fd_step) - (c.value)(x - c.fd_step)) / (2.0 * c.fd_step),
            },
            ProfileSpec::Scaled { factor, inner } => factor * inner.derivative(x)?,
        })
    }

    /// W''(x). Closed form for the tanh family, central differences of W' otherwise.
    pub fn second_derivative(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::InvalidInput(format!("profile argument must be finite, got {x}")));
        }
        Ok(match self {
            ProfileSpec::Linear { .. } => 0.0,
            ProfileSpec::Tanh { amplitude, .. } => -2.0 * amplitude * sech(x).powi(2) * x.tanh(),
            ProfileSpec::TanhPower { exponent, .. } => {
                let p = *exponent as i32;
                let t = x.tanh();
                let s = sech(x).powi(2);
                let lead = if p >= 2 {
                    (p - 1) as f64 * t.powi(p - 2) * s
                } else {
                    0.0
                };
                p as f64 * s * (lead - 2.0 * t.powi(p))
            }
            ProfileSpec::TanhSech { a, b } => {
                let t = x.tanh();
                let s = sech(x);
                -2.0 * a * s * s * t + b * s * (t * t - s * s)
            }
            ProfileSpec::Step { .. } => {
                if x == 0.0 {
                    return Err(Error::StepSingularity);
                }
                0.0
            }
            ProfileSpec::Scaled { factor, inner } => factor * inner.second_derivative(x)?,
            other => {
                let h = other.fd_step().unwrap_or(DEFAULT_FD_STEP);
                (other.derivative(x + h)? - other.derivative(x - h)?) / (2.0 * h)
            }
        })
    }

    /// Whether [`derivative`](Self::derivative) is exact rather than a difference quotient.
    pub fn has_analytic_derivative(&self) -> bool {
        match self {
            ProfileSpec::Tabulated(_) => false,
            ProfileSpec::Custom(c) => c.has_analytic_derivative(),
            ProfileSpec::Scaled { inner, .. } => inner.has_analytic_derivative(),
            _ => true,
        }
    }

    /// The difference step used when no analytic derivative exists.
    pub fn fd_step(&self) -> Option<f64> {
        match self {
            ProfileSpec::Tabulated(t) => Some(t.grid.spacing()),
            ProfileSpec::Custom(c) if c.derivative.is_none() => Some(c.fd_step),
            ProfileSpec::Scaled { inner, .. } => inner.fd_step(),
            _ => None,
        }
    }

    /// Location of a jump discontinuity, if the shape has one.
    pub fn discontinuity(&self) -> Option<f64> {
        match self {
            ProfileSpec::Step { plus, minus } if plus + minus != 0.0 => Some(0.0),
            ProfileSpec::Scaled { factor, inner } if *factor != 0.0 => inner.discontinuity(),
            _ => None,
        }
    }

    /// Limit of W(x) as x -> +inf (`side > 0`) or -inf (`side < 0`), when it exists
    /// in closed form.
    pub fn limit(&self, side: f64) -> Option<f64> {
        let s = side.signum();
        match self {
            ProfileSpec::Linear { slope, offset } => (*slope == 0.0).then_some(*offset),
            ProfileSpec::Tanh { amplitude, shift } => Some(s * amplitude + shift),
            ProfileSpec::TanhPower { shift, .. } => Some(s + shift),
            ProfileSpec::TanhSech { a, .. } => Some(s * a),
            ProfileSpec::Step { plus, minus } => Some(if s > 0.0 { *plus } else { -*minus }),
            ProfileSpec::Tabulated(t) => {
                let v = t.samples();
                Some(if s > 0.0 { v[v.len() - 1] } else { v[0] })
            }
            ProfileSpec::Custom(_) => None,
            ProfileSpec::Scaled { factor, inner } => inner.limit(side).map(|v| factor * v),
        }
    }

    /// Sample the profile at every node of `grid`.
    pub fn sample(&self, grid: &Grid) -> Result<Vec<f64>> {
        grid.nodes().iter().map(|&x| self.evaluate(x)).collect()
    }

    pub fn describe(&self) -> String {
        match self {
            ProfileSpec::Linear { slope, offset } => {
                format!("linear(slope={slope}, offset={offset})")
            }
            ProfileSpec::Tanh { amplitude, shift } => {
                format!("tanh(amplitude={amplitude}, shift={shift})")
            }
            ProfileSpec::TanhPower { exponent, shift } => format!("tanh^{exponent}(shift={shift})"),
            ProfileSpec::TanhSech { a, b } => format!("tanh_sech(a={a}, b={b})"),
            ProfileSpec::Step { plus, minus } => format!("step(plus={plus}, minus={minus})"),
            ProfileSpec::Tabulated(t) => format!("tabulated(n={})", t.samples.len()),
            ProfileSpec::Custom(c) => format!("custom({})", c.name),
            ProfileSpec::Scaled { factor, inner } => format!("{factor}*{}", inner.describe()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn analytic_shapes() -> Vec<ProfileSpec> {
        vec![
            ProfileSpec::Linear {
                slope: 1.7,
                offset: -0.3,
            },
            ProfileSpec::Tanh {
                amplitude: 2.0,
                shift: 0.4,
            },
            ProfileSpec::TanhPower {
                exponent: 1,
                shift: 0.0,
            },
            ProfileSpec::TanhPower {
                exponent: 3,
                shift: 0.5,
            },
            ProfileSpec::TanhPower {
                exponent: 5,
                shift: -0.2,
            },
            ProfileSpec::TanhSech { a: 4.0, b: 1.5 },
            ProfileSpec::tanh(0.8).scaled(5.0),
        ]
    }

    #[test]
    fn tanh_at_origin() {
        let p = ProfileSpec::Tanh {
            amplitude: 2.0,
            shift: 0.0,
        };
        assert_eq!(p.evaluate(0.0).unwrap(), 0.0);
        let p = ProfileSpec::Tanh {
            amplitude: 1.0,
            shift: 0.0,
        };
        assert_eq!(p.derivative(0.0).unwrap(), 1.0);
    }

    #[test]
    fn step_sign_convention() {
        let p = ProfileSpec::step(3.0, 3.0).unwrap();
        assert_eq!(p.evaluate(-1.0).unwrap(), -3.0);
        assert_eq!(p.evaluate(0.0).unwrap(), 3.0);
        assert_eq!(p.evaluate(2.0).unwrap(), 3.0);
        assert_eq!(p.derivative(0.5).unwrap(), 0.0);
        assert_eq!(p.derivative(0.0), Err(Error::StepSingularity));
        assert_eq!(p.discontinuity(), Some(0.0));
    }

    #[test]
    fn tanh_power_saturates() {
        let p = ProfileSpec::tanh_power(3, 0.5).unwrap();
        assert_abs_diff_eq!(p.evaluate(30.0).unwrap(), 1.5, epsilon = 1e-14);
        assert_eq!(p.limit(1.0), Some(1.5));
        assert_eq!(p.limit(-1.0), Some(-0.5));
    }

    #[test]
    fn tanh_power_rejects_even_exponent() {
        assert!(ProfileSpec::tanh_power(2, 0.0).is_err());
        assert!(ProfileSpec::tanh_power(0, 0.0).is_err());
    }

    #[test]
    fn linear_derivative_is_slope() {
        let p = ProfileSpec::Linear {
            slope: 0.7,
            offset: 0.0,
        };
        for x in [-3.0, 0.0, 11.0] {
            assert_eq!(p.derivative(x).unwrap(), 0.7);
        }
    }

    #[test]
    fn tabulated_sine_derivative() {
        let grid = Grid::new(1.0, 2001).unwrap();
        assert_abs_diff_eq!(grid.spacing(), 1e-3, epsilon = 1e-15);
        let p = ProfileSpec::Tabulated(Tabulated::sample(&grid, f64::sin).unwrap());
        assert!(!p.has_analytic_derivative());
        assert_eq!(p.fd_step(), Some(grid.spacing()));
        assert_abs_diff_eq!(p.derivative(0.0).unwrap(), 0.0f64.cos(), epsilon = 1e-6);
    }

    #[test]
    fn tabulated_out_of_range() {
        let grid = Grid::new(1.0, 11).unwrap();
        let p = ProfileSpec::Tabulated(Tabulated::sample(&grid, |x| x).unwrap());
        assert!(matches!(p.evaluate(1.5), Err(Error::OutOfRange { .. })));
        assert_abs_diff_eq!(p.evaluate(0.33).unwrap(), 0.33, epsilon = 1e-14);
    }

    #[test]
    fn tabulated_length_must_match() {
        let grid = Grid::new(1.0, 11).unwrap();
        assert!(matches!(
            Tabulated::new(grid, vec![0.0; 10]),
            Err(Error::ShapeMismatch {
                expected: 11,
                found: 10
            })
        ));
    }

    #[test]
    fn custom_without_derivative_uses_differences() {
        let c = CustomProfile::new("cube", |x| x * x * x);
        let p = ProfileSpec::Custom(c);
        assert!(!p.has_analytic_derivative());
        assert_abs_diff_eq!(p.derivative(2.0).unwrap(), 12.0, epsilon = 1e-8);
        let p = ProfileSpec::Custom(CustomProfile::new("cube", |x| x * x * x).with_derivative(|x| 3.0 * x * x));
        assert!(p.has_analytic_derivative());
        assert_eq!(p.derivative(2.0).unwrap(), 12.0);
    }

    #[test]
    fn evaluation_is_pure() {
        for p in analytic_shapes() {
            for x in [-2.3, 0.0, 0.1, 7.9] {
                assert_eq!(p.evaluate(x).unwrap().to_bits(), p.evaluate(x).unwrap().to_bits());
                assert_eq!(p.derivative(x).unwrap().to_bits(), p.derivative(x).unwrap().to_bits());
            }
        }
    }

    // Richardson check: central differences at h and h/2 approach the analytic
    // derivative with error ratio close to 4.
    #[test]
    fn central_difference_converges_at_second_order() {
        let points = [-1.3, -0.4, 0.2, 0.7, 1.9];
        let h = 1e-2;
        for p in analytic_shapes() {
            for &x in &points {
                let exact = p.derivative(x).unwrap();
                let cd = |h: f64| (p.evaluate(x + h).unwrap() - p.evaluate(x - h).unwrap()) / (2.0 * h);
                let e1 = (cd(h) - exact).abs();
                let e2 = (cd(h / 2.0) - exact).abs();
                if e1 < 1e-11 {
                    // linear shapes are differenced exactly
                    continue;
                }
                let ratio = e1 / e2;
                assert!((3.8..4.2).contains(&ratio), "{} at {x}: ratio {ratio}", p.describe());
            }
        }
    }

    #[test]
    fn second_derivative_matches_differences() {
        for p in analytic_shapes() {
            for x in [-1.1, 0.3, 2.0] {
                let h = 1e-4;
                let fd = (p.derivative(x + h).unwrap() - p.derivative(x - h).unwrap()) / (2.0 * h);
                assert_abs_diff_eq!(p.second_derivative(x).unwrap(), fd, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn scaling_folds_into_parameters() {
        let p = ProfileSpec::Tanh {
            amplitude: 0.8,
            shift: 0.1,
        }
        .scaled(5.0);
        match p {
            ProfileSpec::Tanh { amplitude, shift } => {
                assert_abs_diff_eq!(amplitude, 4.0, epsilon = 1e-15);
                assert_abs_diff_eq!(shift, 0.5, epsilon = 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
        let p = ProfileSpec::tanh_power(3, 0.5).unwrap().scaled(2.0);
        assert_abs_diff_eq!(
            p.evaluate(0.4).unwrap(),
            2.0 * (0.4f64.tanh().powi(3) + 0.5),
            epsilon = 1e-15
        );
        assert_eq!(p.limit(-1.0), Some(-1.0));
    }
}

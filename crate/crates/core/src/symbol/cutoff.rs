use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutoffForm {
    /// `1` on the closed R-ball, `0` outside.
    IndicatorOfBall,
    /// Smooth monotone transition from `1` at |y| = R to `0` at |y| = 2R.
    SmoothRamp,
}

/// Cut-off function sandwiched between the indicators of the R-ball and the 2R-ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffKappa {
    radius: f64,
    form: CutoffForm,
}

impl Default for CutoffKappa {
    fn default() -> Self {
        Self { radius: 1.0, form: CutoffForm::IndicatorOfBall }
    }
}

fn transition(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

impl CutoffKappa {
    pub fn new(radius: f64, form: CutoffForm) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::arg(format!("cut-off radius must be positive, got {radius}")));
        }
        Ok(Self { radius, form })
    }

    pub fn indicator(radius: f64) -> Result<Self> {
        Self::new(radius, CutoffForm::IndicatorOfBall)
    }

    pub fn smooth_ramp(radius: f64) -> Result<Self> {
        Self::new(radius, CutoffForm::SmoothRamp)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn form(&self) -> CutoffForm {
        self.form
    }

    /// Value as a function of |y|.
    pub fn eval_norm(&self, r: f64) -> f64 {
        let big_r = self.radius;
        match self.form {
            CutoffForm::IndicatorOfBall => {
                if r <= big_r {
                    1.0
                } else {
                    0.0
                }
            }
            CutoffForm::SmoothRamp => {
                if r <= big_r {
                    1.0
                } else if r >= 2.0 * big_r {
                    0.0
                } else {
                    let s = (r - big_r) / big_r;
                    let up = transition(1.0 - s);
                    up / (up + transition(s))
                }
            }
        }
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        self.eval_norm(norm(y))
    }

    /// Radii where the cut-off is not smooth; quadrature splits there.
    pub fn breakpoints(&self) -> [f64; 2] {
        [self.radius, 2.0 * self.radius]
    }

    pub fn label(&self) -> String {
        match self.form {
            CutoffForm::IndicatorOfBall => format!("indicator-of-ball(R={})", self.radius),
            CutoffForm::SmoothRamp => format!("smooth-ramp(R={},2R={})", self.radius, 2.0 * self.radius),
        }
    }
}

pub(crate) fn norm(y: &[f64]) -> f64 {
    y.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_nonpositive_radius() {
        assert!(CutoffKappa::indicator(0.0).is_err());
        assert!(CutoffKappa::smooth_ramp(-1.0).is_err());
    }

    #[test]
    fn indicator_closed_ball() {
        let k = CutoffKappa::indicator(1.0).unwrap();
        assert_eq!(k.eval(&[1.0]), 1.0);
        assert_eq!(k.eval(&[1.0 + 1e-12]), 0.0);
        assert_eq!(k.eval(&[0.6, 0.8]), 1.0);
    }

    proptest! {
        #[test]
        fn sandwich(r in 0.1f64..5.0, y in -20.0f64..20.0, smooth in any::<bool>()) {
            let k = if smooth { CutoffKappa::smooth_ramp(r) } else { CutoffKappa::indicator(r) }.unwrap();
            let v = k.eval(&[y]);
            prop_assert!((0.0..=1.0).contains(&v));
            if y.abs() <= r { prop_assert_eq!(v, 1.0); }
            if y.abs() > 2.0 * r { prop_assert_eq!(v, 0.0); }
        }

        #[test]
        fn ramp_is_monotone(r in 0.1f64..5.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let k = CutoffKappa::smooth_ramp(r).unwrap();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(k.eval_norm(r + lo * r) >= k.eval_norm(r + hi * r));
        }
    }
}

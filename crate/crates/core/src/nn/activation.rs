/// Pointwise nonlinearity applied after an affine layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ActivationKind {
    Identity,
    Tanh,
    /// `2 * tanh(x)`, range (-2, 2). Used by noise generators on data in
    /// [-1, 1] so a single noise step can cross the whole range.
    TanhTimes2,
    Sigmoid,
    LeakyReLU(f64),
    ReLU,
}

impl ActivationKind {
    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            ActivationKind::Identity => x,
            ActivationKind::Tanh => x.tanh(),
            ActivationKind::TanhTimes2 => 2.0 * x.tanh(),
            ActivationKind::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            // Slope at exactly 0 is the negative slope, so LeakyReLU(0) == ReLU.
            ActivationKind::LeakyReLU(slope) => {
                if x > 0.0 {
                    x
                } else {
                    slope * x
                }
            }
            ActivationKind::ReLU => x.max(0.0),
        }
    }

    /// Derivative evaluated at the pre-activation value.
    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            ActivationKind::Identity => 1.0,
            ActivationKind::Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
            ActivationKind::TanhTimes2 => {
                let t = x.tanh();
                2.0 * (1.0 - t * t)
            }
            ActivationKind::Sigmoid => {
                let s = 1.0 / (1.0 + (-x).exp());
                s * (1.0 - s)
            }
            ActivationKind::LeakyReLU(slope) => {
                if x > 0.0 {
                    1.0
                } else {
                    slope
                }
            }
            ActivationKind::ReLU => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

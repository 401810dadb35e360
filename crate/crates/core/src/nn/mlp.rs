//! Dense multi-layer perceptron with analytic gradients.

use crate::error::{Error, Result};
use crate::nn::activation::ActivationKind;
use crate::rng::RngState;
use crate::tensor::Tensor2D;

/// Architecture of an MLP: layer widths plus one activation per affine layer.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpSpec {
    pub layer_dims: Vec<usize>,
    pub activations: Vec<ActivationKind>,
}

impl MlpSpec {
    pub fn new(layer_dims: Vec<usize>, activations: Vec<ActivationKind>) -> Result<Self> {
        if layer_dims.len() < 2 {
            return Err(Error::InvalidArgument(
                "an MLP needs at least input and output dims".into(),
            ));
        }
        if layer_dims.contains(&0) {
            return Err(Error::InvalidArgument("layer dims must be >= 1".into()));
        }
        if activations.len() != layer_dims.len() - 1 {
            return Err(Error::InvalidArgument(format!(
                "expected {} activations for {} layers, got {}",
                layer_dims.len() - 1,
                layer_dims.len(),
                activations.len()
            )));
        }
        Ok(MlpSpec {
            layer_dims,
            activations,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    pub fn num_layers(&self) -> usize {
        self.activations.len()
    }

    pub fn final_activation(&self) -> ActivationKind {
        *self.activations.last().unwrap()
    }
}

/// Weights and biases for an [`MlpSpec`]. Weight matrices are stored
/// `out_dim x in_dim`, biases per output unit.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub weights: Vec<Tensor2D>,
    pub biases: Vec<Vec<f64>>,
}

impl MlpParams {
    /// All-zero parameters shaped for `spec`.
    pub fn zeros(spec: &MlpSpec) -> Self {
        let mut weights = Vec::with_capacity(spec.num_layers());
        let mut biases = Vec::with_capacity(spec.num_layers());
        for l in 0..spec.num_layers() {
            weights.push(Tensor2D::zeros(spec.layer_dims[l + 1], spec.layer_dims[l]));
            biases.push(vec![0.0; spec.layer_dims[l + 1]]);
        }
        MlpParams { weights, biases }
    }

    pub fn matches_spec(&self, spec: &MlpSpec) -> bool {
        self.weights.len() == spec.num_layers()
            && self.biases.len() == spec.num_layers()
            && (0..spec.num_layers()).all(|l| {
                self.weights[l].rows() == spec.layer_dims[l + 1]
                    && self.weights[l].cols() == spec.layer_dims[l]
                    && self.biases[l].len() == spec.layer_dims[l + 1]
            })
    }

    /// Total number of scalar parameters.
    pub fn param_count(&self) -> usize {
        self.weights
            .iter()
            .map(|w| w.data().len())
            .chain(self.biases.iter().map(|b| b.len()))
            .sum()
    }

    /// Visit every scalar parameter mutably, in a fixed order.
    pub fn for_each_param_mut(&mut self, mut f: impl FnMut(&mut f64)) {
        for w in &mut self.weights {
            for v in w.data_mut() {
                f(v);
            }
        }
        for b in &mut self.biases {
            for v in b {
                f(v);
            }
        }
    }

    /// Flatten all parameters in the same fixed order as
    /// [`MlpParams::for_each_param_mut`].
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for w in &self.weights {
            out.extend_from_slice(w.data());
        }
        for b in &self.biases {
            out.extend_from_slice(b);
        }
        out
    }
}

/// Gradients shaped like [`MlpParams`], plus the gradient with respect to the
/// network input (needed to chain a frozen downstream network into an
/// upstream one).
#[derive(Debug, Clone)]
pub struct ParamGrads {
    pub weights: Vec<Tensor2D>,
    pub biases: Vec<Vec<f64>>,
}

impl ParamGrads {
    pub fn zeros_like(params: &MlpParams) -> Self {
        ParamGrads {
            weights: params
                .weights
                .iter()
                .map(|w| Tensor2D::zeros(w.rows(), w.cols()))
                .collect(),
            biases: params.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for w in &self.weights {
            out.extend_from_slice(w.data());
        }
        for b in &self.biases {
            out.extend_from_slice(b);
        }
        out
    }
}

/// Per-layer values recorded by [`forward`] that [`backward`] consumes.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input to each affine layer (first entry is the network input).
    pub layer_inputs: Vec<Tensor2D>,
    /// Pre-activation values per layer.
    pub pre_activations: Vec<Tensor2D>,
}

/// Initialize weights uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)], biases
/// zero. Deterministic given the rng.
pub fn init_params(spec: &MlpSpec, rng: &mut RngState) -> Result<MlpParams> {
    let mut params = MlpParams::zeros(spec);
    for l in 0..spec.num_layers() {
        let fan_in = spec.layer_dims[l];
        let bound = 1.0 / (fan_in as f64).sqrt();
        for v in params.weights[l].data_mut() {
            *v = rng.next_range(-bound, bound);
        }
    }
    Ok(params)
}

/// Run the network on a batch. Returns the output along with the cache
/// needed for [`backward`].
pub fn forward(
    params: &MlpParams,
    spec: &MlpSpec,
    x: &Tensor2D,
) -> Result<(Tensor2D, ForwardCache)> {
    if x.cols() != spec.input_dim() {
        return Err(Error::ShapeMismatch(format!(
            "input has {} features, spec expects {}",
            x.cols(),
            spec.input_dim()
        )));
    }
    if !params.matches_spec(spec) {
        return Err(Error::ShapeMismatch(
            "parameters do not match the layer spec".into(),
        ));
    }
    let mut layer_inputs = Vec::with_capacity(spec.num_layers());
    let mut pre_activations = Vec::with_capacity(spec.num_layers());
    let mut current = x.clone();
    for l in 0..spec.num_layers() {
        let z = current
            .matmul_transpose(&params.weights[l])?
            .add_row_vector(&params.biases[l])?;
        let act = spec.activations[l];
        let a = z.map(|v| act.apply(v));
        layer_inputs.push(current);
        pre_activations.push(z);
        current = a;
    }
    let cache = ForwardCache {
        layer_inputs,
        pre_activations,
    };
    Ok((current, cache))
}

/// Output of the network without keeping the cache.
pub fn forward_output(params: &MlpParams, spec: &MlpSpec, x: &Tensor2D) -> Result<Tensor2D> {
    forward(params, spec, x).map(|(out, _)| out)
}

/// Backpropagate `grad_output` (dLoss/dOutput) through the network.
///
/// Returns parameter gradients and the gradient with respect to the input
/// batch. The latter is what lets a generator's update flow through a frozen
/// downstream network.
pub fn backward(
    params: &MlpParams,
    spec: &MlpSpec,
    cache: &ForwardCache,
    grad_output: &Tensor2D,
) -> Result<(ParamGrads, Tensor2D)> {
    let layers = spec.num_layers();
    if cache.layer_inputs.len() != layers || cache.pre_activations.len() != layers {
        return Err(Error::ShapeMismatch(
            "cache does not match the layer spec".into(),
        ));
    }
    if grad_output.cols() != spec.output_dim() || grad_output.rows() != cache.layer_inputs[0].rows()
    {
        return Err(Error::ShapeMismatch(format!(
            "grad_output is {}x{}, expected {}x{}",
            grad_output.rows(),
            grad_output.cols(),
            cache.layer_inputs[0].rows(),
            spec.output_dim()
        )));
    }
    let mut grads = ParamGrads::zeros_like(params);
    let mut grad_post = grad_output.clone();
    for l in (0..layers).rev() {
        let act = spec.activations[l];
        let dact = cache.pre_activations[l].map(|v| act.derivative(v));
        let grad_pre = grad_post.hadamard(&dact)?;
        grads.weights[l] = grad_pre.transpose_matmul(&cache.layer_inputs[l])?;
        grads.biases[l] = grad_pre.column_sums();
        grad_post = grad_pre.matmul(&params.weights[l])?;
    }
    Ok((grads, grad_post))
}

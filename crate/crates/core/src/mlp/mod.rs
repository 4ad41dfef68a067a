//! Multilayer perceptron: parameters, forward pass, regularized
//! cross-entropy, backpropagation and prediction.

mod network;
mod pass;

pub use network::{Activation, InitMode, LayerFile, LayerShape, Network, NetworkFile, MODEL_FORMAT_VERSION};
pub use pass::{
    backward, backward_into, classify, data_loss, forward, loss, one_hot, predict, relu, softmax, DropoutMask,
    ForwardTrace, LossConfig, DEFAULT_PROB_CLAMP,
};

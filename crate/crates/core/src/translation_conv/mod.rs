//! Generalized translation through the product-formula kernel, and the associated convolution.

mod kernel;
mod tensor;

pub use kernel::{cos_chi_star, g_chi, g_plus, in_support, kernel_k, sigma_chi, KernelQuadrature};
pub use tensor::{
    build_kernel_tensor, build_kernel_tensor_rect, convolve, kernel_mass, translate, translate_at, translation_norm_survey,
    KernelTensor,
};

//! Frequency-domain machinery: Fourier transforms on grids, Bessel and
//! Hankel evaluation, the slice identity relating data spectra to field
//! spectra, the filtered Fourier inversion built on it, and the smoothing
//! intertwining between data side and field side.

pub mod bessel;
pub mod convolution;
pub mod fft;
pub mod hankel;
pub mod inversion;
pub mod slice;

pub use bessel::{bessel_j, j0, BesselOrder};
pub use convolution::{convolution_residual, smoothed_set, ConvolutionLevel, SmoothingKernel};
pub use fft::{fourier_nd, inverse_fourier_nd, SpectralField};
pub use hankel::{hankel, hankel_sampled, HankelProfile};
pub use inversion::{invert_fourier, reconstruction_filter};
pub use slice::{slice_constant, slice_residual, slice_vanishing_ratio, SliceParams};

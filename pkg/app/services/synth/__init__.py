from .signals import (
    CovarianceSignalSpec,
    MatrixSignalSpec,
    NoiseSpec,
    TensorSignalSpec,
    decay_spectrum,
    gen_covariance_samples,
    gen_matrix_signal,
    gen_noise_matrix,
    gen_noise_tensor,
    gen_tensor_signal,
    tensor_signal_decomposition,
)

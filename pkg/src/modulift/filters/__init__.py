from .fourier import (
    QExpansion,
    VandermondeSystem,
    q_coefficients,
    q_of,
    synthesize,
    vandermonde_matrix,
    vandermonde_system,
)
from .hecke import HeckeReport, eigen_sequence, hecke_error_bound, hecke_residuals, odd_primes_upto
from .lfunction import (
    LambdaReport,
    LambdaValue,
    central_report,
    central_test,
    complex_gamma,
    epsilon_sign,
    infer_epsilon,
    lambda_complete,
)

__all__ = [
    "QExpansion",
    "VandermondeSystem",
    "q_coefficients",
    "q_of",
    "synthesize",
    "vandermonde_matrix",
    "vandermonde_system",
    "HeckeReport",
    "eigen_sequence",
    "hecke_error_bound",
    "hecke_residuals",
    "odd_primes_upto",
    "LambdaReport",
    "LambdaValue",
    "central_report",
    "central_test",
    "complex_gamma",
    "epsilon_sign",
    "infer_epsilon",
    "lambda_complete",
]

"""Sparse Bayesian dictionary learning.

Thin wrapper over the C++ core. Matrices are numpy float64 arrays, one
signal per column.
"""

from ._sbdl import (
    SbdlError,
    SparseCode,
    add_gaussian_noise,
    atom_distance,
    denoise,
    extract_patches,
    generate_synthetic,
    learn_dictionary,
    load_pgm,
    match_and_score,
    omp,
    omp_batch,
    psnr,
    psnr_mse,
    reassemble_image,
    save_pgm,
)

__version__ = "0.1.0"

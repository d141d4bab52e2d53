"""Semiclassical Liouville field theory laboratory on the unit disk."""

from _lft import (  # noqa: F401
    DiskLattice,
    GffSample,
    GreenOperator,
    KpzReport,
    LiouvilleSolution,
    McConfig,
    PartitionReport,
    PartitionRow,
    SpectralData,
    build_lattice,
    central_charge_to_gamma,
    conformal_radius,
    conformal_weight,
    fluctuation_constant,
    free_energy,
    gmc_total_mass,
    green_kernel,
    h1_energy,
    hminus1_norm,
    kpz_rescaling_identity,
    partition_asymptotics,
    sample_exact,
    solve_liouville,
    weighted_eigs,
)

__all__ = [
    "DiskLattice",
    "GffSample",
    "GreenOperator",
    "KpzReport",
    "LiouvilleSolution",
    "McConfig",
    "PartitionReport",
    "PartitionRow",
    "SpectralData",
    "build_lattice",
    "central_charge_to_gamma",
    "conformal_radius",
    "conformal_weight",
    "fluctuation_constant",
    "free_energy",
    "gmc_total_mass",
    "green_kernel",
    "h1_energy",
    "hminus1_norm",
    "kpz_rescaling_identity",
    "partition_asymptotics",
    "sample_exact",
    "solve_liouville",
    "weighted_eigs",
]

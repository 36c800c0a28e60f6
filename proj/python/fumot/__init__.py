"""Python bindings for the fUMOT reconstruction toolkit."""

from ._core import (
    CaseKind,
    Config,
    ElastoOpticalConstants,
    Error,
    Mesh,
    OpticalModel,
    ScalarField,
    add_noise,
    classify_case,
    compare_fields,
    compute_internal_data,
    compute_J1,
    derive_constants,
    dump_config,
    load_config,
    parse_config,
    preset,
    preset_names,
    reconstruct_eta,
    reconstruct_sigma,
    run_pipeline,
    solve_forward,
    synthesize,
)

__all__ = [
    "CaseKind",
    "Config",
    "ElastoOpticalConstants",
    "Error",
    "Mesh",
    "OpticalModel",
    "ScalarField",
    "add_noise",
    "classify_case",
    "compare_fields",
    "compute_internal_data",
    "compute_J1",
    "derive_constants",
    "dump_config",
    "load_config",
    "parse_config",
    "preset",
    "preset_names",
    "reconstruct_eta",
    "reconstruct_sigma",
    "run_pipeline",
    "solve_forward",
    "synthesize",
]

"""Random-walk knowledge-graph model: Python bindings over the C++ core."""

from ._core import (
    FlockModel,
    Isomorphism,
    KnowledgeGraph,
    ModelConfig,
    PetalsInstance,
    Query,
    Record,
    TrainConfig,
    Triple,
    Walk,
    WalkBatch,
    WalkStep,
    adapt_walk_count,
    anon_translate_check,
    apply_isomorphism,
    evaluate,
    filtered_rank,
    generate_petals_benchmark,
    invariant_baseline_scores,
    load_petals_benchmark,
    make_record,
    petal_automorphism,
    petals_accuracy,
    petals_expected_accuracy,
    random_isomorphism,
    sample_walk_batch,
    save_petals_benchmark,
    train_kg,
    verify_ceiling_certificate,
)

__all__ = [
    "FlockModel",
    "Isomorphism",
    "KnowledgeGraph",
    "ModelConfig",
    "PetalsInstance",
    "Query",
    "Record",
    "TrainConfig",
    "Triple",
    "Walk",
    "WalkBatch",
    "WalkStep",
    "adapt_walk_count",
    "anon_translate_check",
    "apply_isomorphism",
    "evaluate",
    "filtered_rank",
    "generate_petals_benchmark",
    "invariant_baseline_scores",
    "load_petals_benchmark",
    "make_record",
    "petal_automorphism",
    "petals_accuracy",
    "petals_expected_accuracy",
    "random_isomorphism",
    "sample_walk_batch",
    "save_petals_benchmark",
    "train_kg",
    "verify_ceiling_certificate",
]

from .accounting import ResourceReport, format_binary, resource_accounting
from .bounds import (
    AmplitudeBound,
    DeltaBar,
    NoiseBounds,
    RecoveryConditions,
    RipTable,
    delta_bar,
    recovery_conditions,
    theorem1_bounds,
    theorem4_bounds,
)
from .metrics import (
    DB_CAP,
    MetricsReport,
    SvnrParts,
    correct_discovery_rate,
    metrics,
    relative_error,
    rsnr_parts,
    svnr_parts,
    to_db,
)
from .pinv import check_orthogonality, complement_blocks, partitioned_pinv
from .rip import (
    Lemma1Report,
    NaiveDiagnostic,
    RipEstimate,
    lemma1_checks,
    naive_segmentation_diagnostic,
    normalize_columns,
    rip_bruteforce,
    rip_sampled,
)

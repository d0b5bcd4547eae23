from .model import (
    FrequencyOracle,
    GridUniverse,
    MetricSpace,
    ParsedStream,
    StreamFormatError,
    StreamUpdate,
    frequencies,
    parse_stream,
    parse_stream_file,
    points_stream_text,
    sq_dist,
    updates_stream_text,
)
from .ranges import (
    BallRange,
    BallSpace,
    MetricBallUnion,
    MetricUnionSpace,
    RangeSpace,
    SlabRange,
    SlabSpace,
    UnionSpace,
    cost_to_index,
    derive_range_stream,
    derive_range_stream_naive,
    primitive_normals,
)
from .generators import (
    AlmostOrthogonalBatch,
    generate_almost_orthogonal,
    ortho_text,
    random_grid_points,
    random_metric,
    random_updates,
)

__all__ = [
    "AlmostOrthogonalBatch",
    "BallRange",
    "BallSpace",
    "FrequencyOracle",
    "GridUniverse",
    "MetricBallUnion",
    "MetricSpace",
    "MetricUnionSpace",
    "ParsedStream",
    "RangeSpace",
    "SlabRange",
    "SlabSpace",
    "StreamFormatError",
    "StreamUpdate",
    "UnionSpace",
    "cost_to_index",
    "derive_range_stream",
    "derive_range_stream_naive",
    "frequencies",
    "generate_almost_orthogonal",
    "ortho_text",
    "parse_stream",
    "parse_stream_file",
    "points_stream_text",
    "primitive_normals",
    "random_grid_points",
    "random_metric",
    "random_updates",
    "sq_dist",
    "updates_stream_text",
]

"""numpy array field type for pydantic models."""

from typing import Annotated

import numpy as np
from pydantic import PlainSerializer, PlainValidator, WithJsonSchema

NdArray = Annotated[
    np.ndarray,
    PlainValidator(np.asarray),
    PlainSerializer(lambda array: array.tolist(), return_type=list, when_used="json"),
    WithJsonSchema({"type": "array", "items": {}}),
]

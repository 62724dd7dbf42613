"""Module containing numpy field types for domain models.

Fields typed with these accept lists, scalars and arrays; the value is
converted with `np.asarray` before pydantic checks the instance.
"""

from typing import Annotated, Any, Callable

import numpy as np
from pydantic import BeforeValidator


def as_array(dtype: type) -> Callable[[Any], Any]:
    """A function building a converter to arrays of one dtype.

    Args:
        dtype (type): Target numpy dtype.

    Returns:
        Callable[[Any], Any]: Converter that leaves None untouched.
    """

    def convert(value: Any) -> Any:
        if value is None:
            return None
        return np.asarray(value, dtype=dtype)

    return convert


FloatArray = Annotated[np.ndarray, BeforeValidator(as_array(np.float64))]
IntArray = Annotated[np.ndarray, BeforeValidator(as_array(np.int64))]
TimestampArray = Annotated[np.ndarray, BeforeValidator(as_array(np.uint64))]
ChannelArray = Annotated[np.ndarray, BeforeValidator(as_array(np.uint8))]

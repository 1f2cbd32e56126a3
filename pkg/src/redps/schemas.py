import numpy as np
import orjson
from pydantic import BaseModel


def orjson_dumps(v, *, default, indent=None):
    # orjson.dumps returns bytes, to match standard json.dumps we need to decode
    option = orjson.OPT_SERIALIZE_NUMPY
    if indent:
        option |= orjson.OPT_INDENT_2
    return orjson.dumps(v, default=default, option=option).decode()


class SerializableModel(BaseModel):
    """Pydantic base for records that are written out as JSON."""

    class Config:
        arbitrary_types_allowed = True
        json_loads = orjson.loads
        json_dumps = orjson_dumps
        json_encoders = {np.ndarray: lambda arr: arr.tolist(), np.floating: float, np.integer: int}

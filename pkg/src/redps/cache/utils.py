import functools
import hashlib
import json
from collections import OrderedDict
from typing import Any, Dict

# keys that change where results go, not what they are
NON_SEMANTIC_KEYS = ("output", "threads", "log_level", "log_file")


def memoize_dict(maxsize=128):
    """Memoize a function whose first argument is a JSON-able dict, keyed by its hash."""
    cache: "OrderedDict[Any, Any]" = OrderedDict()

    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            hashed = compute_dict_hash(args[0])
            key = (func.__name__, hashed, frozenset(kwargs.items()))
            if key not in cache:
                result = func(*args, **kwargs)
                cache[key] = result
                if len(cache) > maxsize:
                    cache.popitem(last=False)
            else:
                cache.move_to_end(key)
                result = cache[key]
            return result

        def clear_cache():
            cache.clear()

        wrapper.clear_cache = clear_cache  # type: ignore
        wrapper.cache = cache  # type: ignore
        return wrapper

    return decorator


def compute_dict_hash(config_data: Dict[str, Any]) -> str:
    config_data = filter_json(config_data)

    cleaned_json = json.dumps(config_data, sort_keys=True, default=str)
    return hashlib.sha256(cleaned_json.encode("utf-8")).hexdigest()


def filter_json(json_data: Dict[str, Any]) -> Dict[str, Any]:
    filtered_data = json_data.copy()

    for key in NON_SEMANTIC_KEYS:
        filtered_data.pop(key, None)

    return filtered_data

from redps.cache.utils import compute_dict_hash, filter_json, memoize_dict

__all__ = ["compute_dict_hash", "filter_json", "memoize_dict"]

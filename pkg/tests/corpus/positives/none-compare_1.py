def lookup(cache, key, default=None):
    result = cache.get(key)
    if result == None:
        return default
    return result

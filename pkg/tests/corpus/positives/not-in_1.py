def remember(k, cache):
    if not k in cache:
        cache[k] = compute(k)
    return cache[k]

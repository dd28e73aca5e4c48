def second():
    name not in seen

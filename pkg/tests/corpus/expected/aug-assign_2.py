def advance(position, velocity, steps):
    for _ in range(steps):
        position += velocity  # integrate
    return position

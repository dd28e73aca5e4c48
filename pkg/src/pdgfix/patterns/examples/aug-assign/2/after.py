def second():
    count += step

def second():
    count = count + step

def summarize(values):
    total = sum(values)  # running sum

    # report the sum
    return total

def second(rows):
    for j in range(len(rows)):
        rows[j]

def show(items):
    # print every element with its position
    for idx in range(len(items)):
        print(i,   items[i])  # odd spacing stays

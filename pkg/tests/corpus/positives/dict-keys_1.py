class Registry:
    def names(self):
        for name in self.table.keys():
            print(name)

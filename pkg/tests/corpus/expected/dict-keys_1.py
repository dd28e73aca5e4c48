class Registry:
    def names(self):
        for name in self.table:
            print(name)

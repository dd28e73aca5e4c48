import json

config = json.load(open("settings.json"))
for key in config.keys():  # show every setting
    print(key, config[key])

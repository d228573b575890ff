from . import DATA_DIR, write_all

write_all()
print(f"scenarios written to {DATA_DIR}")

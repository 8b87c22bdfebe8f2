# Reporting package: run persistence and report tables
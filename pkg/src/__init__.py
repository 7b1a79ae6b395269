# Fredholm Quasicomplex Workbench
# ===============================
# Hodge theory, parametrices and reduction of quasicomplexes at desk scale

__version__ = "1.0.0"

OUTPUT_PATH = "./runs"
SEED_ENV_VAR = "RSQ_SEED"
DEFAULT_SEED = 1234
VERSION = "0.1.0"

# Dense solver caps (matrix side 2**n).
MAX_DENSE_QUBITS = 14
MAX_UNITARY_QUBITS = 12

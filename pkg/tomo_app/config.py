from pathlib import Path
import sys


# Paths / config
ROOT = Path(__file__).resolve().parent.parent
SRC = ROOT / "src"
if str(SRC) not in sys.path:
    sys.path.append(str(SRC))


OUTPUT_DIR = ROOT / "out"
REPORT_NAME = "report.json"
TABLE_NAME = "errors.csv"


# plots
COLOR_SCALE_ABS = "Viridis"
COLOR_SCALE_ARG = "Twilight"
COLOR_SCALE_ERR = "Inferno"
COLOR_LINES = "#3889b9"
PLOT_RESOLUTION = 201

__version__ = "v0.3"
APP_TITLE = "Attenuated tensor tomography on the disc"

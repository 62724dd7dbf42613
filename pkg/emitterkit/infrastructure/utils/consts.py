"""A module containing constant values for infrastructure layer."""

import numpy as np

# CODATA 2018 exact values
SPEED_OF_LIGHT = 299_792_458.0
PLANCK = 6.626_070_15e-34
ELEMENTARY_CHARGE = 1.602_176_634e-19

# hBN band gap in eV, documented only
BAND_GAP_HBN_EV = 5.955

# excitation set-up
EXCITATION_WAVELENGTH = 522e-9
PULSE_LENGTH = 300e-15
REP_RATE = 20.8e6
SPOT_DIAMETER = 0.67e-6
DARK_RATE = 20.0

# refractive indices at 522 nm (Malitson fused silica, Green 2008 crystalline Si)
N_AMBIENT = 1.0
N_SIO2 = 1.4613
N_SI = complex(4.20, 0.038)
N_HBN = 1.849
SIO2_THICKNESS = 280e-9

# polymer residue lines left by the transfer
BACKGROUND_LINES = {
    "PVP": 576.4e-9,
    "NVP": 605.2e-9,
    "PVA": 619.6e-9,
}
BACKGROUND_TOLERANCE = 5e-9

# ZPL survey bands, meters
ZPL_BAND_START = 550e-9
ZPL_BAND_STOP = 730e-9
ZPL_BAND_WIDTH = 20e-9

ALPHA_CLASSES = ("defect", "free_exciton", "biexciton", "unclassified")

# ETT1 time-tag file layout
ETT_MAGIC = b"ETT1"
ETT_VERSION = 1
ETT_CHANNELS = 3
ETT_HEADER_FORMAT = "<4sHHQ"
ETT_RECORD_DTYPE = np.dtype([("timestamp", "<u8"), ("channel", "u1")])

CI_LEVEL = 0.95
Z95 = 1.959_963_984_540_054

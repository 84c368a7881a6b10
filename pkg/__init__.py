"""This package contains the command line and core for NB-LDPC-MLC."""

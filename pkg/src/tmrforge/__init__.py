"""Voter-partitioned TMR on a modelled SRAM FPGA: build, implement, inject, classify."""

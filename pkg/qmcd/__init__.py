# QMC discrepancy toolkit

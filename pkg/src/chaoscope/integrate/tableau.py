"""Cash-Karp fifth-order Runge-Kutta coefficients.

This is the single constant block for the tableau; the C plugin driver is
rendered from these same values. The embedded fourth-order error weights of
the Cash-Karp pair are not used (fixed-step operation only). The full
tableau, including the unused error row, is tabulated in the README.
"""

C2 = 1.0 / 5.0
C3 = 3.0 / 10.0
C4 = 3.0 / 5.0
C5 = 1.0
C6 = 7.0 / 8.0

A21 = 1.0 / 5.0
A31 = 3.0 / 40.0
A32 = 9.0 / 40.0
A41 = 3.0 / 10.0
A42 = -9.0 / 10.0
A43 = 6.0 / 5.0
A51 = -11.0 / 54.0
A52 = 5.0 / 2.0
A53 = -70.0 / 27.0
A54 = 35.0 / 27.0
A61 = 1631.0 / 55296.0
A62 = 175.0 / 512.0
A63 = 575.0 / 13824.0
A64 = 44275.0 / 110592.0
A65 = 253.0 / 4096.0

B1 = 37.0 / 378.0
B3 = 250.0 / 621.0
B4 = 125.0 / 594.0
B6 = 512.0 / 1771.0

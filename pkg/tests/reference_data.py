"""Published benchmark values used as oracles (rows: k or h, L-inf, L2, H1)."""

TEMPORAL_1D = [
    (2e-2, 0.018930003955949, 0.011905019571153, 0.055826921067779),
    (1e-2, 0.010028587881722, 0.006173875738341, 0.029296196267458),
    (5e-3, 0.005196870030573, 0.003165482579077, 0.015278145278317),
    (2.5e-3, 0.002655553006303, 0.001609938361519, 0.007888811720037),
    (1.25e-3, 0.001342412485260, 8.133526108798887e-04, 0.004027197400045),
    (6.25e-4, 6.742979183864614e-04, 4.090379381003823e-04, 0.002038034696297),
    (3.125e-4, 3.377273200392897e-04, 2.051458547423506e-04, 0.001025746673531),
]
TEMPORAL_1D_ORDERS = (0.970286000783516, 0.977447889884335, 0.961185387141062)

SPATIAL_1D = [
    (1 / 16, 4.212674325335744e-04, 2.887722168727909e-04, 0.002212111086235),
    (1 / 24, 1.872260365181275e-04, 1.277863702263473e-04, 9.790353208801370e-04),
    (1 / 32, 1.049626868055292e-04, 7.163958605254648e-05, 5.502778761147910e-04),
    (1 / 48, 4.608916242324762e-05, 3.159939889548999e-05, 2.449630533418659e-04),
    (1 / 64, 2.545990677620125e-05, 1.760034075909782e-05, 1.382981214094384e-04),
]
SPATIAL_1D_ORDERS = (2.023480961445598, 2.017528405593854, 1.999719394821664)

# (steps, cells, L-inf, L2, H1) with k = 0.1 / steps and h = 1 / cells
COUPLED_3D = [
    (10, 10, 4.997325319509027e-04, 2.885786030289455e-04, 3.172841357302907e-04),
    (40, 20, 1.257686203441910e-04, 7.230181520301087e-05, 1.106111804599846e-04),
    (57, 24, 8.861344600608057e-05, 5.087773586103405e-05, 9.141039466366754e-05),
    (78, 28, 6.508006096783703e-05, 3.736395858299103e-05, 7.960500518126427e-05),
    (102, 32, 5.005337568275703e-05, 2.879318679898088e-05, 7.230037732663106e-05),
]
COUPLED_3D_ORDERS_K = (0.991507777634215, 0.993698915740268, 0.653283961155192)
COUPLED_3D_ORDERS_H = (1.977866420534538, 1.982242514017785, 1.303278322578679)

"""Print how the witness coefficients and mixedness grow with the number of blocks."""
from movingcavity import CavityConfig, Trajectory, run_scenario_B

cfg = CavityConfig(n_max=12)
h = 0.01
print("N,A3_c2,f_k_not_kp,f_kp_not_k_kpp,f_kpp_not_kp")
for n in range(1, 9):
    r = run_scenario_B(cfg, Trajectory.blocks(h, 2.0, n), h, (1, 2, 3))
    m = r.mixedness
    print(f"{n},{r.witnesses['A3'].value.c2.real:.6e},{m['f_k_not_kp']:.6e},"
          f"{m['f_kp_not_k_kpp']:.6e},{m['f_kpp_not_kp']:.6e}")

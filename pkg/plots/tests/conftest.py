import pytest

SWEEP_CSV = """\
# command = sweep
# L = 16
# d = 1
# gamma = 0.2
# kappa_grid = 0.5,2
# kind = SEP
# master_seed = 5
# n_env = 4
# output = sweep.csv
# rho = 0.5
# t_end = 12.0
kappa,p,t,lambda_hat,std_error,replicas,heavy_tail_flag
0.5,0,1.5,0.31,0.05,4,0
0.5,0,3.0,0.22,0.04,4,0
0.5,0,6.0,0.17,0.03,4,0
0.5,0,12.0,0.14,0.02,4,0
0.5,1,12.0,0.2,0.03,200,1
2.0,0,1.5,0.25,0.05,4,0
2.0,0,3.0,0.18,0.04,4,0
2.0,0,6.0,0.14,0.03,4,0
2.0,0,12.0,0.12,0.02,4,0
2.0,1,12.0,0.16,0.03,200,0
"""

CORR_CSV = """\
# command = correlate
# kind = ISRW
# rho = 1.0
# gamma = 1.0
check_name,kind,d,L,rho,x,t,n_env,empirical,std_error,exact,z_score
corr_ISRW_x0_t0.5,ISRW,1,32,1.0,0,0.5,10000,0.6502,0.015,0.645,0.35
corr_ISRW_x0_t1,ISRW,1,32,1.0,0,1.0,10000,0.4758,0.0135,0.4658,0.74
corr_ISRW_x1_t0.5,ISRW,1,32,1.0,1,0.5,10000,0.1827,0.0115,0.1564,2.28
corr_ISRW_x1_t1,ISRW,1,32,1.0,1,1.0,10000,0.2358,0.0116,0.2079,2.41
"""

COND_CSV = """\
# command = conditions
# kind = ISRW
# rho = 1.0
check_name,kind,d,L,rho,T,n_env,empirical,std_error,exact,z_score
E1,ISRW,1,32,1.0,25.0,400,7.1,0.2,,
E2,ISRW,1,32,1.0,25.0,400,80.6,4.0,84.1,-0.9
E4bar,ISRW,1,32,1.0,25.0,400,21000.0,1600.0,,
E1,ISRW,1,32,1.0,100.0,400,14.6,0.5,,
E2,ISRW,1,32,1.0,100.0,400,325.4,20.0,368.1,-2.1
E4bar,ISRW,1,32,1.0,100.0,400,340000.0,30000.0,,
E1,ISRW,1,32,1.0,400.0,400,30.9,1.1,,
E2,ISRW,1,32,1.0,400.0,400,1473.6,100.0,1528.7,-0.6
E4bar,ISRW,1,32,1.0,400.0,400,5700000.0,500000.0,,
"""


@pytest.fixture
def sweep_csv(tmp_path):
    path = tmp_path / "sweep.csv"
    path.write_text(SWEEP_CSV)
    return path


@pytest.fixture
def corr_csv(tmp_path):
    path = tmp_path / "correlate.csv"
    path.write_text(CORR_CSV)
    return path


@pytest.fixture
def cond_csv(tmp_path):
    path = tmp_path / "conditions.csv"
    path.write_text(COND_CSV)
    return path

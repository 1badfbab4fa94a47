# coding: utf-8

# # Checking the loss gradient
#
# The analytic gradient comes from the chain rule through the residual partials and
# the derivative Jacobian. Here it is compared with finite differences of the loss.

# In[1]:

import numpy as np

from sextic_pinn import CombineMode, builtin, collocation_grid, fd_check_gradient, init, loss_gradient
from sextic_pinn.network import NetworkConfig
from sextic_pinn.report import fd_gradient


# In[2]:

params = init(NetworkConfig(seed=7))
xs = collocation_grid(0, 1, 21)
prob = builtin("example2")
g = loss_gradient(params, prob, xs)
fd = fd_gradient(params, prob, xs, rel_step=1e-4, stencil=4)
print(np.c_[g[:5], fd[:5]])


# Worst scaled error for each problem and combine mode. Values below 1e-5 pass.

# In[3]:

for name in ("example1", "example2"):
    for mode in CombineMode:
        e = fd_check_gradient(params, builtin(name), xs, mode, rel_step=1e-4, stencil=4)
        print(f"{name:9s} {mode.value:15s} {e:.2e}")


# The command line does the same: `sextic-pinn gradcheck --problem example2 --seed 7`.

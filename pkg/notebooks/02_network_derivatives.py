# coding: utf-8

# # Network derivatives and their parameter Jacobian
#
# The solver needs y, y', ..., y^(6) of the network output with respect to its input,
# plus how each of those moves with every weight and bias.

# In[1]:

import numpy as np

from sextic_pinn import NetworkConfig, derivative_param_jacobian, derivatives, fd_check_derivatives, init


# A 1-16-1 tanh network with Glorot-normal weights and zero biases.

# In[2]:

params = init(NetworkConfig(seed=42))
print(params.size, params.parameter_names()[:4])


# Derivative stacks at a few points, one row per point.

# In[3]:

xs = np.array([0.0, 0.5, 1.0])
np.set_printoptions(precision=4, suppress=True)
print(derivatives(params, xs))


# Each order k is compared with a central difference of order k - 1.

# In[4]:

print(", ".join(f"{e:.1e}" for e in fd_check_derivatives(params, np.linspace(0, 1, 10))))


# The Jacobian has shape (points, 7, parameters). The closed-form single-layer path
# and the general jet path agree to rounding.

# In[5]:

j_fast = derivative_param_jacobian(params, xs, method="closed_form")
j_jet = derivative_param_jacobian(params, xs, method="jet")
print(j_fast.shape, np.abs(j_fast - j_jet).max())


# Deeper networks go through the jet path.

# In[6]:

deep = init(NetworkConfig(hidden_sizes=(8, 8), seed=1))
print(derivative_param_jacobian(deep, 0.3).shape)

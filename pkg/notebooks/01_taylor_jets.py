# coding: utf-8

# # Taylor jets
#
# A jet carries the normalized coefficients c_k = f^(k)(x0) / k! of a function up to order 7.
# Arithmetic on jets is truncated series arithmetic, and composing with an activation
# gives the jet of the activation applied to the function.

# In[1]:

import numpy as np

from sextic_pinn.taylor import ActivationKind, activation_derivs, jet_compose_activation, jet_variable


# The identity jet at 0 is x itself. Push it through tanh and we get the Maclaurin series.

# In[2]:

x = jet_variable(0.0)
t = jet_compose_activation(ActivationKind.TANH, x)
print(t.coeffs)
print(np.array([0, 1, 0, -1 / 3, 0, 2 / 15, 0, -17 / 315]))


# The raw derivatives are the coefficients times k!.

# In[3]:

print(t.derivatives())
print(activation_derivs(ActivationKind.TANH, 0.0))


# Products work the same way. (1 + x)^2 at x0 = 2 has value 9, slope 6 and c_2 = 1.

# In[4]:

y = jet_variable(2.0) + 1.0
print((y * y).coeffs[:4])


# Derivatives of sigmoid(3x - 1) at x = 0.4, checked against a central difference of order 5.

# In[5]:

z = jet_variable(0.4) * 3.0 - 1.0
s = jet_compose_activation(ActivationKind.SIGMOID, z)
h = 1e-4
d5 = lambda x0: jet_compose_activation(ActivationKind.SIGMOID, jet_variable(x0) * 3.0 - 1.0).derivative(5)
print(s.derivative(6), (d5(0.4 + h) - d5(0.4 - h)) / (2 * h))

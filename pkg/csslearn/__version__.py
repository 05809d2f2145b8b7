"""
Version information for the csslearn spectrum sensing simulator
"""

__version__ = "1.0.0"
__version_info__ = (1, 0, 0)
__title__ = "csslearn"
__description__ = "Collaborative spectrum sensing simulator with online-learning fusion (Hedge, Perceptron, BH/FDR, energy-aware deactivation)"
__author__ = "csslearn contributors"
__license__ = "MIT"

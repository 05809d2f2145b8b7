# Fusion-centre learners and baseline rules

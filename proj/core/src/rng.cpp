#include "picante/rng.hpp"

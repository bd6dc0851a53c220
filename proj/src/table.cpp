#include "omtopo/table.hpp"

#include "catch_amalgamated.hpp"
#include "xfrag/xfrag.hpp"

#include "doctest.h"
// CLI end-to-end tests are added alongside the CLI tool.

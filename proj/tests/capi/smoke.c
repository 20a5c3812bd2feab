/* The public header compiles as C and the library links without C++ glue. */
#include <stdio.h>
#include <string.h>

#include "innervsense/innervsense.h"

int main(void) {
  const uint8_t check[] = "123456789";
  char* names = NULL;
  if (isense_crc16(check, 9) != 0x29B1) return 1;
  if (strlen(isense_version()) == 0) return 1;
  if (isense_scenario_names(&names) != ISENSE_OK) return 1;
  if (strstr(names, "bicep_stepwise") == NULL) return 1;
  isense_free_string(names);
  if (isense_simulate(NULL, NULL, 1, NULL) != ISENSE_INVALID_ARGUMENT) return 1;
  printf("%s\n", isense_status_name(ISENSE_CORRUPT_SESSION));
  return strcmp(isense_status_name(ISENSE_CORRUPT_SESSION), "CorruptSession") == 0 ? 0 : 1;
}

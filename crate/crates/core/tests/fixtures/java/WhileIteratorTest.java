import java.util.Iterator;
import java.util.List;

import org.junit.Test;

public class WhileIteratorTest {

    @Test
    public void removesWhileIterating() {
        List<Integer> nums = new ArrayList<>(List.of(1, 2, 3, 4, 5, 6));
        Iterator<Integer> it = nums.iterator();
        while (it.hasNext()) {
            Integer n = it.next();
            if (n % 2 == 0) {
                it.remove();
            }
        }
        assertEquals(List.of(1, 3, 5), nums);
    }
}
